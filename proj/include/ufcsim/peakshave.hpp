#pragma once

#include "ufcsim/fleet.hpp"
#include "ufcsim/tariff.hpp"

#include <Eigen/Dense>

namespace ufcsim {

/// Storage spec. Round-trip losses are split between a charge efficiency
/// (grid -> store) and a discharge efficiency (store -> grid); the symmetric
/// sqrt split is the default, asymmetric splits are allowed directly.
struct Battery {
    double capacity_kwh = 0.0;
    double max_charge_kw = 0.0;
    double max_discharge_kw = 0.0;
    double charge_efficiency = 1.0;
    double discharge_efficiency = 1.0;
    double initial_soc_kwh = 0.0;

    double round_trip_efficiency() const { return charge_efficiency * discharge_efficiency; }

    static Battery symmetric(double capacity_kwh, double max_charge_kw, double max_discharge_kw,
                             double round_trip_efficiency, double initial_soc_kwh);
};

void validate(const Battery& battery);

/// Per-slot dispatch on the 15-minute billing grid. battery_kw is the net
/// grid-side power, positive when discharging into the load, negative when
/// charging from the grid. soc_kwh has one entry per slot boundary, starting
/// at the battery's initial state.
struct DispatchPlan {
    Battery battery;
    Eigen::ArrayXd battery_kw;
    Eigen::ArrayXd soc_kwh;
    bool cyclic = true;

    Eigen::Index slots() const { return battery_kw.size(); }
};

struct PeakShaveResult {
    DispatchPlan plan;
    double achieved_peak_kw = 0.0;
};

struct CostShaveResult {
    DispatchPlan plan;
    CostBreakdown cost;
};

/// Minimal feasible peak cap found by bisection over [0, max(load)];
/// feasibility of a cap is checked by forward simulation that discharges
/// whenever the load exceeds the cap and recharges greedily below it. The
/// returned plan recharges only as far as the cyclic SoC target requires,
/// never drawing above the cap. Bisection stops when the cap interval is
/// below 0.01 kW.
PeakShaveResult min_peak_dispatch(const BillingProfile& profile, const Battery& battery,
                                  bool cyclic = true);

/// Minimizes energy plus demand charges of the shaved profile; solved as a
/// linear program over per-slot charge/discharge variables with one auxiliary
/// max-demand variable per billed category.
CostShaveResult min_cost_dispatch(const BillingProfile& profile, const Battery& battery,
                                  const TouSchedule& schedule, double demand_proration = 1.0,
                                  bool cyclic = true);

/// Validates every plan invariant (power limits, SoC bounds, SoC trajectory
/// consistency, cyclic closure, nonnegative grid draw) and returns the shaved
/// grid profile load - battery_kw. Violations name the first offending slot.
BillingProfile apply_dispatch(const BillingProfile& profile, const DispatchPlan& plan);

} // namespace ufcsim
