#include "ufcsim/peakshave.hpp"

#include "ufcsim/errors.hpp"
#include "ufcsim/io_util.hpp"
#include "ufcsim/lp.hpp"
#include "ufcsim/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ufcsim {

namespace {

constexpr double kDh = kBillSlotHours;
constexpr double kCapResolutionKw = 0.01;

double soc_tolerance(const Battery& battery) {
    return 1e-6 * std::max(1.0, battery.capacity_kwh);
}

double power_tolerance(const Battery& battery, double load_peak) {
    return 1e-6 * std::max({1.0, battery.max_charge_kw, battery.max_discharge_kw, load_peak});
}

/// Forward simulation with maximal recharging against per-slot draw caps; a
/// cap profile is feasible iff every forced discharge can be met and the
/// cycle can close at or above the initial state of charge.
bool caps_feasible(const Eigen::ArrayXd& load, const Battery& battery,
                   const Eigen::ArrayXd& caps, bool cyclic) {
    double soc = battery.initial_soc_kwh;
    const double tol = soc_tolerance(battery);
    for (Eigen::Index t = 0; t < load.size(); ++t) {
        if (load[t] > caps[t]) {
            double discharge = load[t] - caps[t];
            if (discharge > battery.max_discharge_kw * (1.0 + 1e-12) + tol) {
                return false;
            }
            double drain = discharge * kDh / battery.discharge_efficiency;
            if (drain > soc + tol) {
                return false;
            }
            soc = std::max(0.0, soc - drain);
        } else {
            double charge = std::min(battery.max_charge_kw, caps[t] - load[t]);
            double gain = charge * battery.charge_efficiency * kDh;
            soc = std::min(battery.capacity_kwh, soc + gain);
        }
    }
    return !cyclic || soc >= battery.initial_soc_kwh - tol;
}

/// Lazy plan under feasible per-slot caps: a backward pass computes the
/// minimal SoC required at each boundary to serve future forced discharges
/// and close the cycle; the forward pass then charges only up to that
/// requirement, so the terminal state lands exactly on the initial one.
DispatchPlan build_plan(const Eigen::ArrayXd& load, const Battery& battery,
                        const Eigen::ArrayXd& caps, bool cyclic) {
    const Eigen::Index n = load.size();
    Eigen::ArrayXd required(n + 1);
    required[n] = cyclic ? battery.initial_soc_kwh : 0.0;
    for (Eigen::Index t = n - 1; t >= 0; --t) {
        if (load[t] > caps[t]) {
            double drain = (load[t] - caps[t]) * kDh / battery.discharge_efficiency;
            required[t] = required[t + 1] + drain;
        } else {
            double gain = std::min(battery.max_charge_kw, caps[t] - load[t]) *
                          battery.charge_efficiency * kDh;
            required[t] = std::max(0.0, required[t + 1] - gain);
        }
    }

    DispatchPlan plan;
    plan.battery = battery;
    plan.cyclic = cyclic;
    plan.battery_kw = Eigen::ArrayXd::Zero(n);
    plan.soc_kwh = Eigen::ArrayXd::Zero(n + 1);
    plan.soc_kwh[0] = battery.initial_soc_kwh;

    double soc = battery.initial_soc_kwh;
    for (Eigen::Index t = 0; t < n; ++t) {
        if (load[t] > caps[t]) {
            double discharge = std::min(load[t] - caps[t], battery.max_discharge_kw);
            soc -= discharge * kDh / battery.discharge_efficiency;
            soc = std::max(soc, 0.0);
            plan.battery_kw[t] = discharge;
        } else {
            double need = std::max(0.0, required[t + 1] - soc);
            double charge = need / (battery.charge_efficiency * kDh);
            charge = std::min({charge, battery.max_charge_kw, caps[t] - load[t],
                               (battery.capacity_kwh - soc) / (battery.charge_efficiency * kDh)});
            charge = std::max(charge, 0.0);
            soc += charge * battery.charge_efficiency * kDh;
            plan.battery_kw[t] = -charge;
        }
        plan.soc_kwh[t + 1] = soc;
    }
    if (cyclic && std::abs(soc - battery.initial_soc_kwh) <= soc_tolerance(battery)) {
        plan.soc_kwh[n] = battery.initial_soc_kwh;
    }
    return plan;
}

void check_profile(const BillingProfile& profile) {
    if (profile.horizon_slots() == 0) {
        throw ValidationError("dispatch needs a non-empty load profile");
    }
    for (Eigen::Index t = 0; t < profile.kw.size(); ++t) {
        if (!(profile.kw[t] >= 0.0)) {
            throw ValidationError("load profile has negative draw at slot " + std::to_string(t));
        }
    }
}

} // namespace

Battery Battery::symmetric(double capacity_kwh, double max_charge_kw, double max_discharge_kw,
                           double round_trip_efficiency, double initial_soc_kwh) {
    Battery battery;
    battery.capacity_kwh = capacity_kwh;
    battery.max_charge_kw = max_charge_kw;
    battery.max_discharge_kw = max_discharge_kw;
    battery.charge_efficiency = std::sqrt(round_trip_efficiency);
    battery.discharge_efficiency = std::sqrt(round_trip_efficiency);
    battery.initial_soc_kwh = initial_soc_kwh;
    return battery;
}

void validate(const Battery& battery) {
    if (!(battery.capacity_kwh >= 0.0)) {
        throw ValidationError("battery capacity must be nonnegative");
    }
    if (!(battery.max_charge_kw > 0.0) || !(battery.max_discharge_kw > 0.0)) {
        throw ValidationError("battery power limits must be positive");
    }
    if (!(battery.charge_efficiency > 0.0) || battery.charge_efficiency > 1.0 ||
        !(battery.discharge_efficiency > 0.0) || battery.discharge_efficiency > 1.0) {
        throw ValidationError("battery efficiencies must lie in (0,1]");
    }
    if (battery.initial_soc_kwh < 0.0 || battery.initial_soc_kwh > battery.capacity_kwh) {
        throw ValidationError("initial SoC must lie within [0, capacity]");
    }
}

PeakShaveResult min_peak_dispatch(const BillingProfile& profile, const Battery& battery,
                                  bool cyclic) {
    validate(battery);
    check_profile(profile);

    const Eigen::ArrayXd& load = profile.kw;
    const Eigen::Index n = load.size();
    auto feasible = [&](double cap) {
        return caps_feasible(load, battery, Eigen::ArrayXd::Constant(n, cap), cyclic);
    };

    double hi = load.maxCoeff();
    if (!feasible(hi)) {
        throw InfeasibleError("battery cannot close its cycle even without shaving");
    }
    double lo = 0.0;
    if (feasible(lo)) {
        hi = lo;
    } else {
        while (hi - lo >= kCapResolutionKw) {
            double mid = 0.5 * (lo + hi);
            if (feasible(mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }

    PeakShaveResult result;
    result.plan = build_plan(load, battery, Eigen::ArrayXd::Constant(n, hi), cyclic);
    result.achieved_peak_kw = (load - result.plan.battery_kw).maxCoeff();
    return result;
}

CostShaveResult min_cost_dispatch(const BillingProfile& profile, const Battery& battery,
                                  const TouSchedule& schedule, double demand_proration,
                                  bool cyclic) {
    validate(battery);
    check_profile(profile);
    if (profile.horizon_slots() != schedule.horizon_slots()) {
        throw ValidationError("load profile and schedule horizons differ");
    }
    if (!(demand_proration >= 0.0)) {
        throw ValidationError("demand proration must be nonnegative");
    }

    const Eigen::Index n = profile.horizon_slots();
    const Eigen::ArrayXd& load = profile.kw;

    Eigen::ArrayXd energy_rate(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        double rate = schedule.energy_rates[static_cast<int>(schedule.slot_period[t])];
        if (std::isnan(rate)) {
            throw ValidationError("schedule has no energy rate for a classified slot");
        }
        energy_rate[t] = rate;
    }

    struct Category {
        double rate = 0.0;
        std::vector<Eigen::Index> slots;
    };
    std::vector<Category> categories;
    auto add_category = [&](DemandCategory cat, const Eigen::ArrayXd* mask) {
        const auto& rate = schedule.demand_rates[static_cast<int>(cat)];
        if (!rate || *rate * demand_proration == 0.0) return;
        Category category;
        category.rate = *rate * demand_proration;
        for (Eigen::Index t = 0; t < n; ++t) {
            if (mask == nullptr || (*mask)[t] != 0.0) {
                category.slots.push_back(t);
            }
        }
        if (!category.slots.empty()) {
            categories.push_back(std::move(category));
        }
    };
    if (schedule.period_masks[0].size() == n) {
        add_category(DemandCategory::peak, &schedule.period_masks[static_cast<int>(Period::peak)]);
        add_category(DemandCategory::part_peak,
                     &schedule.period_masks[static_cast<int>(Period::part_peak)]);
    }
    add_category(DemandCategory::max, nullptr);

    double max_demand_rate = 0.0;
    for (const auto& cat : categories) {
        max_demand_rate = std::max(max_demand_rate, cat.rate);
    }
    double cost_scale =
        std::max(energy_rate.abs().maxCoeff() * kDh, max_demand_rate / static_cast<double>(n));

    auto finish = [&](DispatchPlan plan) {
        CostShaveResult result;
        BillingProfile shaved = apply_dispatch(profile, plan);
        EnergyCharges energy = energy_charge(shaved, schedule);
        result.cost.energy_peak = energy.peak;
        result.cost.energy_part_peak = energy.part_peak;
        result.cost.energy_off_peak = energy.off_peak;
        result.cost.demand = demand_charge(shaved, schedule, demand_proration);
        result.cost.om_and_capital = 0.0;
        result.cost.total = result.cost.energy_total() + result.cost.demand;
        result.plan = std::move(plan);
        return result;
    };

    if (battery.capacity_kwh == 0.0 || cost_scale == 0.0) {
        DispatchPlan plan;
        plan.battery = battery;
        plan.cyclic = cyclic;
        plan.battery_kw = Eigen::ArrayXd::Zero(n);
        plan.soc_kwh = Eigen::ArrayXd::Constant(n + 1, battery.initial_soc_kwh);
        return finish(std::move(plan));
    }

    // Column layout: charge[n] | discharge[n] | soc[n] | max-demand[K] | slacks.
    const Eigen::Index col_charge = 0;
    const Eigen::Index col_discharge = n;
    const Eigen::Index col_soc = 2 * n;
    const Eigen::Index col_demand = 3 * n;
    const Eigen::Index k = static_cast<Eigen::Index>(categories.size());
    Eigen::Index next_col = col_demand + k;
    Eigen::Index next_row = 0;

    LpProblem lp;
    const double charge_gain = battery.charge_efficiency * kDh;
    const double discharge_drain = kDh / battery.discharge_efficiency;
    // Tiny symmetric activity penalty keeps simultaneous charge/discharge out
    // of the optimal face without measurably moving the optimum.
    const double activity_penalty = 1e-8 * cost_scale;

    std::vector<double> cost;
    std::vector<double> upper;
    cost.assign(static_cast<size_t>(col_demand + k), 0.0);
    upper.assign(static_cast<size_t>(col_demand + k), 0.0);
    for (Eigen::Index t = 0; t < n; ++t) {
        cost[static_cast<size_t>(col_charge + t)] = energy_rate[t] * kDh + activity_penalty;
        upper[static_cast<size_t>(col_charge + t)] = battery.max_charge_kw;
        cost[static_cast<size_t>(col_discharge + t)] = -energy_rate[t] * kDh + activity_penalty;
        upper[static_cast<size_t>(col_discharge + t)] = battery.max_discharge_kw;
        cost[static_cast<size_t>(col_soc + t)] = 0.0;
        upper[static_cast<size_t>(col_soc + t)] = battery.capacity_kwh;
    }
    for (Eigen::Index j = 0; j < k; ++j) {
        cost[static_cast<size_t>(col_demand + j)] = categories[static_cast<size_t>(j)].rate;
        upper[static_cast<size_t>(col_demand + j)] = std::numeric_limits<double>::infinity();
    }

    std::vector<double> rhs;

    // SoC recurrence: soc_t - soc_{t-1} - gain*charge_t + drain*discharge_t = 0.
    for (Eigen::Index t = 0; t < n; ++t) {
        lp.add_entry(next_row, col_soc + t, 1.0);
        if (t > 0) {
            lp.add_entry(next_row, col_soc + t - 1, -1.0);
        }
        lp.add_entry(next_row, col_charge + t, -charge_gain);
        lp.add_entry(next_row, col_discharge + t, discharge_drain);
        rhs.push_back(t == 0 ? battery.initial_soc_kwh : 0.0);
        ++next_row;
    }
    if (cyclic) {
        lp.add_entry(next_row, col_soc + n - 1, 1.0);
        rhs.push_back(battery.initial_soc_kwh);
        ++next_row;
    }
    // Grid draw stays nonnegative: discharge_t - charge_t + g_t = load_t.
    for (Eigen::Index t = 0; t < n; ++t) {
        lp.add_entry(next_row, col_discharge + t, 1.0);
        lp.add_entry(next_row, col_charge + t, -1.0);
        lp.add_entry(next_row, next_col, 1.0);
        cost.push_back(0.0);
        upper.push_back(std::numeric_limits<double>::infinity());
        ++next_col;
        rhs.push_back(load[t]);
        ++next_row;
    }
    // Category caps: charge_t - discharge_t - M_k + slack = -load_t.
    for (Eigen::Index j = 0; j < k; ++j) {
        for (Eigen::Index t : categories[static_cast<size_t>(j)].slots) {
            lp.add_entry(next_row, col_charge + t, 1.0);
            lp.add_entry(next_row, col_discharge + t, -1.0);
            lp.add_entry(next_row, col_demand + j, -1.0);
            lp.add_entry(next_row, next_col, 1.0);
            cost.push_back(0.0);
            upper.push_back(std::numeric_limits<double>::infinity());
            ++next_col;
            rhs.push_back(-load[t]);
            ++next_row;
        }
    }

    lp.num_vars = next_col;
    lp.num_rows = next_row;
    lp.cost = Eigen::Map<Eigen::VectorXd>(cost.data(), static_cast<Eigen::Index>(cost.size()));
    lp.upper = Eigen::Map<Eigen::VectorXd>(upper.data(), static_cast<Eigen::Index>(upper.size()));
    lp.rhs = Eigen::Map<Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));

    LpSolution solution = solve_lp(lp);
    if (solution.status != LpStatus::optimal) {
        throw SolverError("cost dispatch LP did not converge: " + solution.diagnostics());
    }

    // Rebuild a clean plan from the LP's grid draws. Treating them as
    // per-slot caps and recharging lazily reproduces the LP cost (the draw
    // can only drop further) while restoring exact SoC bookkeeping that the
    // relaxed LP iterate cannot provide.
    const Eigen::Index g_slack = col_demand + k;
    Eigen::ArrayXd caps(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        double draw = solution.x[g_slack + t];
        caps[t] = std::max(draw, std::max(0.0, load[t] - battery.max_discharge_kw));
    }
    if (!caps_feasible(load, battery, caps, cyclic)) {
        // LP residual noise can leave the caps a hair too tight.
        caps += 1e-6 * std::max(1.0, load.maxCoeff());
        if (!caps_feasible(load, battery, caps, cyclic)) {
            throw SolverError("LP dispatch could not be reconstructed: " +
                              solution.diagnostics());
        }
    }
    return finish(build_plan(load, battery, caps, cyclic));
}

BillingProfile apply_dispatch(const BillingProfile& profile, const DispatchPlan& plan) {
    validate(plan.battery);
    const Eigen::Index n = profile.horizon_slots();
    if (plan.battery_kw.size() != n || plan.soc_kwh.size() != n + 1) {
        throw ValidationError("dispatch plan does not match the load profile horizon");
    }
    const Battery& battery = plan.battery;
    const double load_peak = n == 0 ? 0.0 : profile.kw.maxCoeff();
    const double eps_kw = power_tolerance(battery, load_peak);
    const double eps_kwh = soc_tolerance(battery);

    if (std::abs(plan.soc_kwh[0] - battery.initial_soc_kwh) > eps_kwh) {
        throw ValidationError("plan SoC trajectory does not start at the initial SoC");
    }
    double soc = battery.initial_soc_kwh;
    for (Eigen::Index t = 0; t < n; ++t) {
        double net = plan.battery_kw[t];
        if (net > battery.max_discharge_kw + eps_kw) {
            throw ValidationError("discharge limit exceeded at slot " + std::to_string(t));
        }
        if (-net > battery.max_charge_kw + eps_kw) {
            throw ValidationError("charge limit exceeded at slot " + std::to_string(t));
        }
        if (profile.kw[t] - net < -eps_kw) {
            throw ValidationError("negative grid draw at slot " + std::to_string(t));
        }
        if (net >= 0.0) {
            soc -= net * kDh / battery.discharge_efficiency;
        } else {
            soc += -net * battery.charge_efficiency * kDh;
        }
        if (soc < -eps_kwh || soc > battery.capacity_kwh + eps_kwh) {
            throw ValidationError("SoC out of bounds at slot " + std::to_string(t));
        }
        if (std::abs(plan.soc_kwh[t + 1] - soc) > 10.0 * eps_kwh) {
            throw ValidationError("stored SoC trajectory inconsistent at slot " +
                                  std::to_string(t));
        }
    }
    if (plan.cyclic && std::abs(soc - battery.initial_soc_kwh) > 10.0 * eps_kwh) {
        throw ValidationError("terminal SoC does not close the cycle (slot " +
                              std::to_string(n - 1) + ")");
    }

    BillingProfile shaved;
    shaved.kw = (profile.kw - plan.battery_kw).max(0.0);
    return shaved;
}

} // namespace ufcsim
