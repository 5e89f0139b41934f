#pragma once

#include "ufcsim/arrivals.hpp"
#include "ufcsim/fleet.hpp"
#include "ufcsim/objectives.hpp"
#include "ufcsim/tariff.hpp"

#include <vector>

namespace ufcsim {

/// Everything a scenario evaluation needs besides the share: tariff book,
/// season, technology pair, VOT table, and billing conventions.
struct ScenarioContext {
    const TariffBook* book = nullptr;
    Season season = Season::summer;
    ChargerTech l2{3.0, 60.0, "L2"};
    ChargerTech ufc{900.0, 60.0, "UFC"};
    std::vector<VotModel> vot_models = default_vot_models();
    double billing_days = 7.0;
    double demand_proration = 1.0;
};

/// The two pure-technology profiles a sweep blends between; synthesizing them
/// once makes every intermediate share an affine combination.
struct PureProfiles {
    PowerProfile l2_power;
    PowerProfile ufc_power;
    BillingProfile l2_billing;
    BillingProfile ufc_billing;
    double weekly_arrivals = 0.0;
};

PureProfiles make_pure_profiles(const ArrivalProfile& arrivals, const ChargerTech& l2,
                                const ChargerTech& ufc);

ScenarioResult evaluate_scenario(const ScenarioContext& ctx, const PureProfiles& pure,
                                 double ufc_share);

/// Runs shares i/(steps-1) for i in 0..steps-1; deterministic, results ordered
/// by share. `jobs` bounds the worker threads.
std::vector<ScenarioResult> run_sweep(const ScenarioContext& ctx, const ArrivalProfile& arrivals,
                                      int steps, int jobs = 1);

/// Electricity-plus-stations cost at the two sweep endpoints, as used by the
/// tipping-point analysis. energy_only drops demand and station components.
struct TippingInputs {
    double cost_at_share0 = 0.0;
    double cost_at_share1 = 0.0;
    double weekly_arrivals = 0.0;
};

TippingInputs tipping_inputs(const ScenarioContext& ctx, const ArrivalProfile& arrivals,
                             bool energy_only = false);

} // namespace ufcsim
