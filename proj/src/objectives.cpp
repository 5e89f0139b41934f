#include "ufcsim/objectives.hpp"

#include "ufcsim/errors.hpp"
#include "ufcsim/io_util.hpp"
#include "ufcsim/time_grid.hpp"

namespace ufcsim {

std::vector<VotModel> default_vot_models() {
    return {
        {"no_vot", 0.00},
        {"tipping_point", 0.70},
        {"fed_min_wage", 7.25},
        {"uber_avg_income", 8.55},
    };
}

double ev_user_cost(const CostBreakdown& cost, double arrivals_total, double ufc_share,
                    double l2_session_hours, double ufc_session_hours, const VotModel& vot) {
    if (!(ufc_share >= 0.0 && ufc_share <= 1.0)) {
        throw ValidationError("ufc share must lie in [0,1], got " + format_double(ufc_share));
    }
    if (arrivals_total < 0.0) {
        throw ValidationError("arrival total must be nonnegative");
    }
    if (vot.rate_usd_per_hour < 0.0) {
        throw ValidationError("VOT rate must be nonnegative");
    }
    double hours_per_arrival =
        (1.0 - ufc_share) * l2_session_hours + ufc_share * ufc_session_hours;
    return cost.total + vot.rate_usd_per_hour * arrivals_total * hours_per_arrival;
}

double vot_tipping_point(double elec_cost_at_share0, double elec_cost_at_share1,
                         double arrivals_total, double l2_session_hours,
                         double ufc_session_hours) {
    if (!(arrivals_total > 0.0)) {
        throw ValidationError("tipping point needs a positive arrival total");
    }
    if (!(l2_session_hours > ufc_session_hours)) {
        throw ValidationError("tipping point assumes the slow session outlasts the fast one");
    }
    double gap = elec_cost_at_share1 - elec_cost_at_share0;
    if (gap <= 0.0) {
        return 0.0;
    }
    return gap / (arrivals_total * (l2_session_hours - ufc_session_hours));
}

GridMetrics grid_metrics(const BillingProfile& profile, const TouSchedule& schedule) {
    if (profile.horizon_slots() != schedule.horizon_slots()) {
        throw ValidationError("billing profile and schedule horizons differ");
    }
    GridMetrics metrics;
    metrics.observed_peak_kw = profile.horizon_slots() == 0 ? 0.0 : profile.kw.maxCoeff();
    if (schedule.metrics_peak_mask.size() == profile.horizon_slots()) {
        metrics.peak_period_energy_kwh =
            (profile.kw * schedule.metrics_peak_mask).sum() * kBillSlotHours;
    }
    return metrics;
}

RegionalShare regional_peak_share(const GridContext& ctx, double added_peak_kw) {
    if (!(ctx.regional_peak_mw > 0.0)) {
        throw ValidationError("regional peak must be positive");
    }
    if (!(ctx.sub_population > 0.0) || !(ctx.total_population > 0.0) ||
        ctx.sub_population > ctx.total_population) {
        throw ValidationError("populations must be positive with sub <= total");
    }
    if (added_peak_kw < 0.0) {
        throw ValidationError("added peak must be nonnegative");
    }
    RegionalShare share;
    share.baseline_mw = ctx.regional_peak_mw * (ctx.sub_population / ctx.total_population);
    share.fraction = (added_peak_kw / 1000.0) / share.baseline_mw;
    return share;
}

} // namespace ufcsim
