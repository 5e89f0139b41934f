#include "ufcsim/sweep.hpp"

#include "ufcsim/errors.hpp"

#include <algorithm>
#include <thread>

namespace ufcsim {

PureProfiles make_pure_profiles(const ArrivalProfile& arrivals, const ChargerTech& l2,
                                const ChargerTech& ufc) {
    PureProfiles pure;
    pure.l2_power = synthesize_profile(arrivals, l2);
    pure.ufc_power = synthesize_profile(arrivals, ufc);
    pure.l2_billing = downsample_15min(pure.l2_power);
    pure.ufc_billing = downsample_15min(pure.ufc_power);
    pure.weekly_arrivals = arrivals.total();
    return pure;
}

ScenarioResult evaluate_scenario(const ScenarioContext& ctx, const PureProfiles& pure,
                                 double ufc_share) {
    if (ctx.book == nullptr) {
        throw ValidationError("scenario context has no tariff book");
    }
    if (!(ufc_share >= 0.0 && ufc_share <= 1.0)) {
        throw ValidationError("ufc share must lie in [0,1]");
    }

    // Fractional arrival split: each technology's aggregate profile scales
    // linearly with its share of arrivals.
    BillingProfile l2_component{(1.0 - ufc_share) * pure.l2_billing.kw};
    BillingProfile ufc_component{ufc_share * pure.ufc_billing.kw};
    BillingProfile combined{l2_component.kw + ufc_component.kw};

    const TouSchedule& l2_schedule = ctx.book->l2_schedule(ctx.season);
    const TouSchedule& ufc_schedule = ctx.book->ufc_schedule(ctx.season);

    ScenarioResult result;
    result.ufc_share = ufc_share;
    result.cost = total_cost(l2_component, ufc_component, l2_schedule, ufc_schedule,
                             ctx.book->total_plugs * (1.0 - ufc_share),
                             ctx.book->total_plugs * ufc_share, ctx.book->l2_costs,
                             ctx.book->ufc_costs, ctx.billing_days, ctx.demand_proration);
    result.grid = grid_metrics(combined, l2_schedule);
    result.weekly_energy_kwh = total_energy_kwh(combined);
    result.weekly_arrivals = pure.weekly_arrivals;

    double l2_hours = session_duration_hours(ctx.l2);
    double ufc_hours = session_duration_hours(ctx.ufc);
    for (const auto& vot : ctx.vot_models) {
        result.ev_user_totals.emplace_back(
            vot.label, ev_user_cost(result.cost, pure.weekly_arrivals, ufc_share, l2_hours,
                                    ufc_hours, vot));
    }
    return result;
}

std::vector<ScenarioResult> run_sweep(const ScenarioContext& ctx, const ArrivalProfile& arrivals,
                                      int steps, int jobs) {
    if (steps < 2) {
        throw ValidationError("sweep needs at least 2 steps, got " + std::to_string(steps));
    }
    if (jobs < 1) {
        throw ValidationError("jobs must be at least 1");
    }

    PureProfiles pure = make_pure_profiles(arrivals, ctx.l2, ctx.ufc);
    std::vector<ScenarioResult> results(static_cast<size_t>(steps));

    auto worker = [&](int first) {
        for (int i = first; i < steps; i += jobs) {
            double share = static_cast<double>(i) / (steps - 1);
            results[static_cast<size_t>(i)] = evaluate_scenario(ctx, pure, share);
        }
    };

    jobs = std::min(jobs, steps);
    if (jobs == 1) {
        worker(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<size_t>(jobs));
        for (int j = 0; j < jobs; ++j) {
            threads.emplace_back(worker, j);
        }
        for (auto& t : threads) {
            t.join();
        }
    }
    return results;
}

TippingInputs tipping_inputs(const ScenarioContext& ctx, const ArrivalProfile& arrivals,
                             bool energy_only) {
    PureProfiles pure = make_pure_profiles(arrivals, ctx.l2, ctx.ufc);
    ScenarioResult at0 = evaluate_scenario(ctx, pure, 0.0);
    ScenarioResult at1 = evaluate_scenario(ctx, pure, 1.0);

    TippingInputs inputs;
    inputs.weekly_arrivals = pure.weekly_arrivals;
    if (energy_only) {
        inputs.cost_at_share0 = at0.cost.energy_total();
        inputs.cost_at_share1 = at1.cost.energy_total();
    } else {
        inputs.cost_at_share0 = at0.cost.total;
        inputs.cost_at_share1 = at1.cost.total;
    }
    return inputs;
}

} // namespace ufcsim
