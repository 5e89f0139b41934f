#pragma once

#include "ufcsim/tariff.hpp"

#include <string>
#include <vector>

namespace ufcsim {

/// Dollar value of an hour spent charging, used to monetize session time.
struct VotModel {
    std::string label;
    double rate_usd_per_hour = 0.0;
};

/// Default value-of-time table: no VOT, tipping point, federal minimum wage,
/// average Uber-driver income.
std::vector<VotModel> default_vot_models();

/// Regional context for attributing added charging peak to the wider grid.
struct GridContext {
    double regional_peak_mw = 50116.0;
    double sub_population = 7.76e6;
    double total_population = 39.54e6;
};

struct RegionalShare {
    double baseline_mw = 0.0;
    double fraction = 0.0;
};

struct GridMetrics {
    double peak_period_energy_kwh = 0.0;
    double observed_peak_kw = 0.0;
};

/// One scenario's evaluated objectives across all three stakeholders.
struct ScenarioResult {
    double ufc_share = 0.0;
    CostBreakdown cost;
    std::vector<std::pair<std::string, double>> ev_user_totals; // per VOT model
    GridMetrics grid;
    double weekly_energy_kwh = 0.0;
    double weekly_arrivals = 0.0;
};

/// Station bill plus the monetized time all arrivals spend charging:
/// vot * arrivals * ((1-share)*l2_hours + share*ufc_hours).
double ev_user_cost(const CostBreakdown& cost, double arrivals_total, double ufc_share,
                    double l2_session_hours, double ufc_session_hours, const VotModel& vot);

/// The $/hour rate at which a driver values all-L2 and all-UFC service
/// equally: (elec1 - elec0) / (arrivals * (l2_hours - ufc_hours)), floored at
/// zero when UFC is already cheaper.
double vot_tipping_point(double elec_cost_at_share0, double elec_cost_at_share1,
                         double arrivals_total, double l2_session_hours = 20.0,
                         double ufc_session_hours = 1.0 / 15.0);

/// Energy drawn during the schedule's measured peak window plus the maximum
/// 15-minute draw over all slots.
GridMetrics grid_metrics(const BillingProfile& profile, const TouSchedule& schedule);

/// Population-proportional peak attribution: baseline = regional peak scaled
/// by population share; fraction = added peak / baseline.
RegionalShare regional_peak_share(const GridContext& ctx, double added_peak_kw);

} // namespace ufcsim
