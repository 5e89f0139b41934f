#pragma once

#include "ufcsim/fleet.hpp"

#include <Eigen/Dense>

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ufcsim {

enum class Season { summer, winter };

Season parse_season(const std::string& name);
std::string season_name(Season season);

enum class Period { off_peak = 0, part_peak = 1, peak = 2 };
inline constexpr int kPeriodCount = 3;

Period parse_period(const std::string& name);
std::string period_name(Period period);

/// Demand-charge categories: the per-month maximum 15-minute draw observed
/// during peak slots, part-peak slots, and all slots respectively.
enum class DemandCategory { peak = 0, part_peak = 1, max = 2 };
inline constexpr int kDemandCategoryCount = 3;

std::string demand_category_name(DemandCategory category);

/// One time-of-day classification rule: on the listed days, minutes
/// [start_minute, end_minute) belong to `period`. Rules must align to the
/// 15-minute billing grid and tile each day exactly.
struct PeriodRule {
    std::array<bool, 7> days{}; // Monday = index 0
    int start_minute = 0;
    int end_minute = 0;
    Period period = Period::off_peak;
};

/// A seasonal TOU schedule resolved onto the 15-minute weekly grid.
/// energy_rates entries are NaN when the season does not price that period;
/// demand_rates entries are absent when the season does not bill the category.
struct TouSchedule {
    std::string tariff_name;
    Season season = Season::summer;
    std::vector<Period> slot_period;               // one entry per billing slot
    std::array<double, kPeriodCount> energy_rates; // $/kWh, NaN = absent
    std::array<std::optional<double>, kDemandCategoryCount> demand_rates; // $/kW
    std::array<Eigen::ArrayXd, kPeriodCount> period_masks; // 0/1 per slot
    Eigen::ArrayXd metrics_peak_mask; // window measured by grid metrics

    Eigen::Index horizon_slots() const { return static_cast<Eigen::Index>(slot_period.size()); }
};

/// Builds a weekly schedule from rules and rates, validating full-day tiling,
/// grid alignment, and that winter defines no peak period.
TouSchedule build_schedule(const std::string& tariff_name, Season season,
                           const std::vector<PeriodRule>& rules,
                           const std::array<double, kPeriodCount>& energy_rates,
                           const std::array<std::optional<double>, kDemandCategoryCount>& demand_rates);

struct StationCostParams {
    double om_annual_usd = 0.0;
    double capital_annualized_usd = 0.0;
};

struct EnergyCharges {
    double peak = 0.0;
    double part_peak = 0.0;
    double off_peak = 0.0;
    double total() const { return peak + part_peak + off_peak; }
};

struct CostBreakdown {
    double energy_peak = 0.0;
    double energy_part_peak = 0.0;
    double energy_off_peak = 0.0;
    double demand = 0.0;
    double om_and_capital = 0.0;
    double total = 0.0;

    double energy_total() const { return energy_peak + energy_part_peak + energy_off_peak; }
};

/// Per-interval energy billing: kW * 0.25 h * rate of the slot's period,
/// accumulated per period.
EnergyCharges energy_charge(const BillingProfile& profile, const TouSchedule& schedule);

/// Demand charge for one billing run: per category, the maximum 15-minute
/// draw over that category's slots times its $/kW rate. `proration` rescales
/// the monthly rates (1.0 bills the run as a full month, 7/30 prorates a week).
double demand_charge(const BillingProfile& profile, const TouSchedule& schedule,
                     double proration = 1.0);

double station_costs(const StationCostParams& params, double station_count, double billing_days);

/// Bills each technology's aggregate profile under its own tariff and sums
/// the components; no cross-technology netting.
CostBreakdown total_cost(const BillingProfile& l2_profile, const BillingProfile& ufc_profile,
                         const TouSchedule& l2_schedule, const TouSchedule& ufc_schedule,
                         double l2_station_count, double ufc_station_count,
                         const StationCostParams& l2_params, const StationCostParams& ufc_params,
                         double billing_days, double demand_proration = 1.0);

/// Parsed tariff config file: schedules per tariff name and season, the
/// tariff assignment per technology, station cost params, plug total, and the
/// clock window grid metrics use when a season defines no peak period.
struct TariffBook {
    std::map<std::string, std::map<Season, TouSchedule>> schedules;
    std::string l2_tariff;
    std::string ufc_tariff;
    StationCostParams l2_costs;
    StationCostParams ufc_costs;
    double total_plugs = 3500.0;
    std::uint64_t config_hash = 0;

    const TouSchedule& schedule(const std::string& tariff, Season season) const;
    const TouSchedule& l2_schedule(Season season) const { return schedule(l2_tariff, season); }
    const TouSchedule& ufc_schedule(Season season) const { return schedule(ufc_tariff, season); }
};

TariffBook load_tariffs(const std::string& path);
TariffBook parse_tariffs(const std::string& json_text, const std::string& source_name);

} // namespace ufcsim
