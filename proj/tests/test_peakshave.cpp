#include "ufcsim/peakshave.hpp"
#include "ufcsim/errors.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ufcsim;

namespace {

constexpr double kDh = kBillSlotHours;

BillingProfile make_load(std::initializer_list<double> values) {
    BillingProfile profile;
    profile.kw = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double v : values) {
        profile.kw[i++] = v;
    }
    return profile;
}

double stored_delta(const Battery& bat, double net_kw) {
    return net_kw >= 0.0 ? -net_kw * kDh / bat.discharge_efficiency
                         : -net_kw * bat.charge_efficiency * kDh;
}

/// Independent feasibility check for a peak cap: propagate the exact interval
/// of reachable SoC values and test whether the cycle can close.
bool interval_cap_feasible(const Eigen::ArrayXd& load, const Battery& bat, double cap) {
    double lo = bat.initial_soc_kwh;
    double hi = bat.initial_soc_kwh;
    for (Eigen::Index t = 0; t < load.size(); ++t) {
        double net_hi = std::min(load[t], bat.max_discharge_kw);
        double net_lo = std::max(load[t] - cap, -bat.max_charge_kw);
        if (net_lo > net_hi + 1e-12) {
            return false;
        }
        double next_lo = std::max(0.0, lo + stored_delta(bat, net_hi));
        double next_hi = std::min(bat.capacity_kwh, hi + stored_delta(bat, net_lo));
        if (next_lo > next_hi + 1e-12) {
            return false;
        }
        lo = next_lo;
        hi = next_hi;
    }
    return bat.initial_soc_kwh <= hi + 1e-9 && bat.initial_soc_kwh >= lo - 1e-9;
}

/// Discretized brute force: the smallest feasible cap on a fine grid.
double oracle_min_peak(const Eigen::ArrayXd& load, const Battery& bat, int grid = 2048) {
    double peak = load.maxCoeff();
    if (peak == 0.0) {
        return 0.0;
    }
    double best = peak;
    for (int i = grid; i >= 0; --i) {
        double cap = peak * i / grid;
        if (interval_cap_feasible(load, bat, cap)) {
            best = cap;
        } else {
            break;
        }
    }
    return best;
}

/// Exhaustive minimum peak over a per-slot net-power lattice; the final slot
/// closes the cycle exactly. Only viable for a handful of slots.
double brute_force_min_peak(const Eigen::ArrayXd& load, const Battery& bat, int levels) {
    const Eigen::Index n = load.size();
    double best = load.maxCoeff();

    std::vector<double> nets(static_cast<size_t>(n), 0.0);
    auto recurse = [&](auto&& self, Eigen::Index t, double soc, double peak_so_far) -> void {
        if (peak_so_far >= best) {
            return;
        }
        if (t == n - 1) {
            double delta_needed = bat.initial_soc_kwh - soc;
            double net;
            if (delta_needed <= 0.0) {
                net = -delta_needed * bat.discharge_efficiency / kDh;
                if (net > bat.max_discharge_kw + 1e-9 || net > load[t] + 1e-9) return;
            } else {
                net = -delta_needed / (bat.charge_efficiency * kDh);
                if (-net > bat.max_charge_kw + 1e-9) return;
            }
            double draw = load[t] - net;
            if (draw < -1e-9) return;
            best = std::min(best, std::max(peak_so_far, draw));
            return;
        }
        for (int level = 0; level <= levels; ++level) {
            double net = -bat.max_charge_kw +
                         (bat.max_discharge_kw + bat.max_charge_kw) * level / levels;
            net = std::min(net, load[t]); // grid draw stays nonnegative
            double next = soc + stored_delta(bat, net);
            if (next < -1e-9 || next > bat.capacity_kwh + 1e-9) continue;
            self(self, t + 1, std::clamp(next, 0.0, bat.capacity_kwh),
                 std::max(peak_so_far, load[t] - net));
        }
    };
    recurse(recurse, 0, bat.initial_soc_kwh, 0.0);
    return best;
}

void check_energy_balance(const DispatchPlan& plan) {
    double in = 0.0;
    double out = 0.0;
    for (Eigen::Index t = 0; t < plan.slots(); ++t) {
        double net = plan.battery_kw[t];
        if (net < 0.0) {
            in += -net * plan.battery.charge_efficiency * kDh;
        } else {
            out += net * kDh / plan.battery.discharge_efficiency;
        }
    }
    CHECK(std::abs(in - out) <= 1e-6 * std::max(1.0, in));
}

} // namespace

TEST_CASE("a zero-capacity battery shaves nothing") {
    BillingProfile load = make_load({120.0, 30.0, 80.0, 10.0});
    Battery battery = Battery::symmetric(0.0, 50.0, 50.0, 1.0, 0.0);
    PeakShaveResult result = min_peak_dispatch(load, battery);
    CHECK(result.achieved_peak_kw == 120.0);
    CHECK(result.plan.battery_kw.abs().maxCoeff() == 0.0);
    apply_dispatch(load, result.plan);
}

TEST_CASE("two-slot halving example") {
    BillingProfile load = make_load({100.0, 0.0});
    Battery battery = Battery::symmetric(12.5, 100.0, 100.0, 1.0, 12.5);
    PeakShaveResult result = min_peak_dispatch(load, battery);
    CHECK(result.achieved_peak_kw == doctest::Approx(50.0).epsilon(2e-4));

    BillingProfile shaved = apply_dispatch(load, result.plan);
    CHECK(shaved.kw[0] == doctest::Approx(50.0).epsilon(2e-4));
    CHECK(shaved.kw[1] == doctest::Approx(50.0).epsilon(2e-4));

    CHECK(brute_force_min_peak(load.kw, battery, 200) == doctest::Approx(50.0).epsilon(1e-6));
}

TEST_CASE("constant load cannot be shaved under a cyclic constraint") {
    BillingProfile load = make_load({80.0, 80.0, 80.0, 80.0, 80.0, 80.0});
    Battery battery = Battery::symmetric(100.0, 50.0, 50.0, 0.81, 50.0);
    PeakShaveResult result = min_peak_dispatch(load, battery);
    CHECK(result.achieved_peak_kw == doctest::Approx(80.0).epsilon(2e-4));
}

TEST_CASE("a free terminal lets stored energy subsidize the whole window") {
    BillingProfile load = make_load({100.0, 100.0, 100.0, 100.0});
    Battery battery = Battery::symmetric(25.0, 100.0, 100.0, 1.0, 25.0);
    PeakShaveResult cyclic = min_peak_dispatch(load, battery, true);
    CHECK(cyclic.achieved_peak_kw == doctest::Approx(100.0).epsilon(2e-4));
    PeakShaveResult free_terminal = min_peak_dispatch(load, battery, false);
    CHECK(free_terminal.achieved_peak_kw == doctest::Approx(75.0).epsilon(2e-4));
    apply_dispatch(load, free_terminal.plan);
}

TEST_CASE("bisection tracks the brute-force oracle on tiny instances") {
    std::mt19937 rng(71);
    std::uniform_real_distribution<double> load_dist(0.0, 150.0);
    for (int trial = 0; trial < 12; ++trial) {
        Eigen::Index n = 2 + trial % 3;
        BillingProfile load;
        load.kw = Eigen::ArrayXd::Zero(n);
        for (Eigen::Index t = 0; t < n; ++t) {
            load.kw[t] = load_dist(rng);
        }
        double capacity = 5.0 + trial;
        Battery battery = Battery::symmetric(capacity, 60.0, 60.0, trial % 2 ? 1.0 : 0.9,
                                             capacity / 2.0);
        PeakShaveResult result = min_peak_dispatch(load, battery);
        double brute = brute_force_min_peak(load.kw, battery, 400);
        CAPTURE(trial);
        REQUIRE(result.achieved_peak_kw <=
                brute + 0.01 * std::max(brute, 1.0) + 2e-3 * load.kw.maxCoeff());
        REQUIRE(result.achieved_peak_kw >= brute - 0.01 * std::max(brute, 1.0) - 0.01);
    }
}

TEST_CASE("achieved peak matches the interval oracle across random instances") {
    std::mt19937 rng(73);
    std::uniform_real_distribution<double> load_dist(0.0, 400.0);
    std::uniform_real_distribution<double> cap_dist(0.0, 60.0);
    for (int trial = 0; trial < 40; ++trial) {
        Eigen::Index n = 2 + trial % 11;
        BillingProfile load;
        load.kw = Eigen::ArrayXd::Zero(n);
        for (Eigen::Index t = 0; t < n; ++t) {
            load.kw[t] = load_dist(rng);
        }
        double capacity = cap_dist(rng);
        Battery battery = Battery::symmetric(capacity, 80.0, 70.0, trial % 2 ? 1.0 : 0.85,
                                             capacity * 0.5);
        PeakShaveResult result = min_peak_dispatch(load, battery);
        double oracle = oracle_min_peak(load.kw, battery);
        CAPTURE(trial);
        CAPTURE(n);
        REQUIRE(std::abs(result.achieved_peak_kw - oracle) <=
                0.01 * std::max(oracle, 1.0) + load.kw.maxCoeff() / 2048.0 + 0.01);

        apply_dispatch(load, result.plan);
        check_energy_balance(result.plan);
    }
}

TEST_CASE("lossless plans respect the window energy-balance bound") {
    // With perfect efficiency, energy discharged over any contiguous cyclic
    // window can draw on at most a full battery plus what the window itself
    // recharges below the cap.
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> load_dist(0.0, 250.0);
    for (int trial = 0; trial < 8; ++trial) {
        Eigen::Index n = 4 + trial;
        BillingProfile load;
        load.kw = Eigen::ArrayXd::Zero(n);
        for (Eigen::Index t = 0; t < n; ++t) {
            load.kw[t] = load_dist(rng);
        }
        Battery battery = Battery::symmetric(15.0, 60.0, 60.0, 1.0, 7.5);
        PeakShaveResult result = min_peak_dispatch(load, battery);
        for (Eigen::Index start = 0; start < n; ++start) {
            for (Eigen::Index len = 1; len <= n; ++len) {
                double discharged = 0.0;
                double recharged = 0.0;
                for (Eigen::Index k = 0; k < len; ++k) {
                    double net = result.plan.battery_kw[(start + k) % n];
                    (net >= 0.0 ? discharged : recharged) += std::abs(net) * kDh;
                }
                REQUIRE(discharged <= battery.capacity_kwh + recharged + 1e-9);
            }
        }
    }
}

TEST_CASE("more capacity or more discharge headroom never hurts") {
    std::mt19937 rng(79);
    std::uniform_real_distribution<double> load_dist(0.0, 300.0);
    for (int trial = 0; trial < 10; ++trial) {
        BillingProfile load;
        load.kw = Eigen::ArrayXd::Zero(12);
        for (Eigen::Index t = 0; t < 12; ++t) {
            load.kw[t] = load_dist(rng);
        }
        Battery small = Battery::symmetric(10.0, 40.0, 40.0, 0.9, 5.0);
        Battery bigger_cap = Battery::symmetric(25.0, 40.0, 40.0, 0.9, 12.5);
        Battery stronger = Battery::symmetric(10.0, 40.0, 90.0, 0.9, 5.0);
        double base = min_peak_dispatch(load, small).achieved_peak_kw;
        REQUIRE(min_peak_dispatch(load, bigger_cap).achieved_peak_kw <= base + 0.021);
        REQUIRE(min_peak_dispatch(load, stronger).achieved_peak_kw <= base + 0.021);
    }
}

TEST_CASE("battery validation rejects broken configs") {
    CHECK_THROWS_AS(validate(Battery::symmetric(10.0, 0.0, 5.0, 1.0, 0.0)), ValidationError);
    CHECK_THROWS_AS(validate(Battery::symmetric(10.0, 5.0, 5.0, 0.0, 0.0)), ValidationError);
    CHECK_THROWS_AS(validate(Battery::symmetric(10.0, 5.0, 5.0, 1.2, 0.0)), ValidationError);
    CHECK_THROWS_AS(validate(Battery::symmetric(10.0, 5.0, 5.0, 1.0, 11.0)), ValidationError);
    CHECK_THROWS_AS(validate(Battery::symmetric(-1.0, 5.0, 5.0, 1.0, 0.0)), ValidationError);
}

TEST_CASE("apply_dispatch flags the first violated slot") {
    BillingProfile load = make_load({10.0, 10.0});
    Battery battery = Battery::symmetric(10.0, 20.0, 20.0, 1.0, 5.0);

    DispatchPlan plan;
    plan.battery = battery;
    plan.cyclic = false;
    plan.battery_kw = Eigen::ArrayXd::Zero(2);
    plan.soc_kwh = Eigen::ArrayXd::Constant(3, 5.0);

    SUBCASE("negative grid draw") {
        plan.battery_kw[0] = 15.0;
        CHECK_THROWS_WITH_AS(apply_dispatch(load, plan), doctest::Contains("slot 0"),
                             ValidationError);
    }
    SUBCASE("discharge limit") {
        plan.battery_kw[1] = 25.0;
        CHECK_THROWS_WITH_AS(apply_dispatch(load, plan), doctest::Contains("slot 1"),
                             ValidationError);
    }
    SUBCASE("charge limit") {
        plan.battery_kw[0] = -25.0;
        CHECK_THROWS_WITH_AS(apply_dispatch(load, plan), doctest::Contains("slot 0"),
                             ValidationError);
    }
    SUBCASE("soc ceiling") {
        plan.battery_kw[0] = -20.0; // +5 kWh onto 5 kWh stored twice would burst 10 kWh
        plan.battery_kw[1] = -20.0;
        plan.soc_kwh[1] = 10.0;
        plan.soc_kwh[2] = 15.0;
        CHECK_THROWS_WITH_AS(apply_dispatch(load, plan), doctest::Contains("slot 1"),
                             ValidationError);
    }
    SUBCASE("cyclic closure") {
        plan.cyclic = true;
        plan.battery_kw[0] = 4.0;
        plan.soc_kwh[1] = 4.0;
        plan.soc_kwh[2] = 4.0;
        CHECK_THROWS_AS(apply_dispatch(load, plan), ValidationError);
    }
    SUBCASE("valid zero plan is the identity") {
        BillingProfile shaved = apply_dispatch(load, plan);
        CHECK((shaved.kw == load.kw).all());
    }
}

TEST_CASE("cost dispatch with a zero-capacity battery bills the raw profile") {
    BillingProfile load = make_load({50.0, 20.0, 90.0, 10.0});
    Battery battery = Battery::symmetric(0.0, 10.0, 10.0, 1.0, 0.0);
    TouSchedule schedule = testutil::flat_schedule(4, 0.2, 12.0);
    CostShaveResult result = min_cost_dispatch(load, battery, schedule);
    double unshaved = energy_charge(load, schedule).total() + demand_charge(load, schedule);
    CHECK(result.cost.total == unshaved);
    CHECK(result.plan.battery_kw.abs().maxCoeff() == 0.0);
}

TEST_CASE("flat rate and perfect efficiency leave nothing to gain") {
    BillingProfile load = make_load({50.0, 20.0, 90.0, 10.0, 70.0, 30.0});
    Battery battery = Battery::symmetric(30.0, 40.0, 40.0, 1.0, 15.0);
    TouSchedule schedule = testutil::flat_schedule(6, 0.15);
    CostShaveResult result = min_cost_dispatch(load, battery, schedule);
    double unshaved = energy_charge(load, schedule).total();
    CHECK(result.cost.total == doctest::Approx(unshaved).epsilon(1e-6));
    apply_dispatch(load, result.plan);
}

TEST_CASE("a pure max-demand objective reproduces the peak optimum") {
    BillingProfile load = make_load({120.0, 10.0, 60.0, 200.0, 40.0, 90.0, 15.0, 150.0});
    Battery battery = Battery::symmetric(20.0, 80.0, 80.0, 0.9, 10.0);
    TouSchedule schedule = testutil::flat_schedule(8, 0.0, 17.87);

    CostShaveResult cost_result = min_cost_dispatch(load, battery, schedule);
    PeakShaveResult peak_result = min_peak_dispatch(load, battery);

    double lp_peak = (load.kw - cost_result.plan.battery_kw).maxCoeff();
    CHECK(std::abs(lp_peak - peak_result.achieved_peak_kw) <= 0.01);
    CHECK(cost_result.cost.demand == doctest::Approx(17.87 * lp_peak).epsilon(1e-9));
    apply_dispatch(load, cost_result.plan);
    check_energy_balance(cost_result.plan);
}

TEST_CASE("time-of-use arbitrage moves energy into the cheap slot") {
    BillingProfile load = make_load({100.0, 100.0});
    Battery battery = Battery::symmetric(25.0, 100.0, 100.0, 1.0, 25.0);

    TouSchedule schedule = testutil::flat_schedule(2, 0.0);
    schedule.slot_period[0] = Period::peak;
    schedule.energy_rates[static_cast<int>(Period::peak)] = 0.5;
    schedule.energy_rates[static_cast<int>(Period::off_peak)] = 0.1;
    schedule.period_masks[static_cast<int>(Period::peak)] = Eigen::ArrayXd::Zero(2);
    schedule.period_masks[static_cast<int>(Period::peak)][0] = 1.0;
    schedule.period_masks[static_cast<int>(Period::off_peak)] = Eigen::ArrayXd::Zero(2);
    schedule.period_masks[static_cast<int>(Period::off_peak)][1] = 1.0;

    CostShaveResult result = min_cost_dispatch(load, battery, schedule);
    // Hand optimum: empty the battery into slot 0 (draw 0), refill in slot 1
    // (draw 200): 200 kW * 0.25 h * 0.1 = $5.
    CHECK(result.cost.total == doctest::Approx(5.0).epsilon(1e-5));
    apply_dispatch(load, result.plan);
    check_energy_balance(result.plan);
}

TEST_CASE("cost dispatch stays within a lattice oracle's reach") {
    std::mt19937 rng(83);
    std::uniform_real_distribution<double> load_dist(10.0, 120.0);
    std::uniform_real_distribution<double> rate_dist(0.05, 0.5);

    for (int trial = 0; trial < 6; ++trial) {
        const Eigen::Index n = 2 + trial % 2;
        BillingProfile load;
        load.kw = Eigen::ArrayXd::Zero(n);
        for (Eigen::Index t = 0; t < n; ++t) {
            load.kw[t] = load_dist(rng);
        }
        Battery battery = Battery::symmetric(12.0, 50.0, 50.0, trial % 2 ? 1.0 : 0.81, 6.0);
        TouSchedule schedule =
            testutil::flat_schedule(n, rate_dist(rng), trial % 3 == 0 ? 8.0 : -1.0);

        CostShaveResult result = min_cost_dispatch(load, battery, schedule);

        // Lattice oracle over net stored-energy deltas; the last slot closes
        // the cycle exactly, so every candidate is feasible for the LP too.
        const int K = 60;
        double step = battery.capacity_kwh / K;
        double best = std::numeric_limits<double>::infinity();
        std::vector<double> nets(static_cast<size_t>(n), 0.0);
        auto net_from_delta = [&](double delta, double load_t) {
            double net = delta <= 0.0 ? -delta * battery.discharge_efficiency / kDh
                                      : -delta / (battery.charge_efficiency * kDh);
            if (net > battery.max_discharge_kw + 1e-9 || -net > battery.max_charge_kw + 1e-9 ||
                net > load_t + 1e-9) {
                return std::numeric_limits<double>::quiet_NaN();
            }
            return net;
        };
        auto evaluate = [&]() {
            BillingProfile shaved;
            shaved.kw = Eigen::ArrayXd::Zero(n);
            for (Eigen::Index t = 0; t < n; ++t) {
                shaved.kw[t] = load.kw[t] - nets[static_cast<size_t>(t)];
            }
            double cost = energy_charge(shaved, schedule).total() +
                          demand_charge(shaved, schedule);
            best = std::min(best, cost);
        };
        auto recurse = [&](auto&& self, Eigen::Index t, double soc) -> void {
            if (t == n - 1) {
                double delta = battery.initial_soc_kwh - soc;
                double net = net_from_delta(delta, load.kw[t]);
                if (std::isnan(net)) return;
                nets[static_cast<size_t>(t)] = net;
                evaluate();
                return;
            }
            for (int i = -K; i <= K; ++i) {
                double delta = i * step;
                double next = soc + delta;
                if (next < -1e-9 || next > battery.capacity_kwh + 1e-9) continue;
                double net = net_from_delta(delta, load.kw[t]);
                if (std::isnan(net)) continue;
                nets[static_cast<size_t>(t)] = net;
                self(self, t + 1, next);
            }
        };
        recurse(recurse, 0, battery.initial_soc_kwh);

        CAPTURE(trial);
        REQUIRE(std::isfinite(best));
        // The LP optimum can only undercut the lattice optimum.
        REQUIRE(result.cost.total <= best + 1e-6 * std::max(1.0, best));
        // And the lattice should come close given its resolution.
        double rate_bound = schedule.energy_rates[static_cast<int>(Period::off_peak)];
        double demand_rate = schedule.demand_rates[2] ? *schedule.demand_rates[2] : 0.0;
        double slack = static_cast<double>(n) * step / kDh * (rate_bound * kDh + demand_rate) +
                       1e-6;
        REQUIRE(best <= result.cost.total + slack);
        apply_dispatch(load, result.plan);
    }
}

TEST_CASE("dispatch rejects mismatched schedules and bad proration") {
    BillingProfile load = make_load({10.0, 20.0});
    Battery battery = Battery::symmetric(5.0, 10.0, 10.0, 1.0, 2.5);
    TouSchedule schedule = testutil::flat_schedule(3, 0.1);
    CHECK_THROWS_AS(min_cost_dispatch(load, battery, schedule), ValidationError);
    TouSchedule ok = testutil::flat_schedule(2, 0.1);
    CHECK_THROWS_AS(min_cost_dispatch(load, battery, ok, -1.0), ValidationError);
}
