#include "ufcsim/tariff.hpp"

#include "ufcsim/errors.hpp"
#include "ufcsim/io_util.hpp"
#include "ufcsim/time_grid.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ufcsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const char* kDayNames[7] = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};

int parse_clock_minute(const std::string& text, const std::string& where) {
    size_t colon = text.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= text.size()) {
        throw ValidationError(where + ": bad clock time '" + text + "'");
    }
    int h = 0;
    int m = 0;
    try {
        h = std::stoi(text.substr(0, colon));
        m = std::stoi(text.substr(colon + 1));
    } catch (const std::exception&) {
        throw ValidationError(where + ": bad clock time '" + text + "'");
    }
    if (h < 0 || h > 24 || m < 0 || m >= 60 || (h == 24 && m != 0)) {
        throw ValidationError(where + ": clock time out of range '" + text + "'");
    }
    return h * 60 + m;
}

std::array<bool, 7> parse_days(const nlohmann::json& value, const std::string& where) {
    std::array<bool, 7> days{};
    auto apply_word = [&](const std::string& word) {
        if (word == "all") {
            days.fill(true);
        } else if (word == "weekday") {
            for (int d = 0; d < 5; ++d) days[d] = true;
        } else if (word == "weekend") {
            days[5] = days[6] = true;
        } else {
            for (int d = 0; d < 7; ++d) {
                if (word == kDayNames[d]) {
                    days[d] = true;
                    return;
                }
            }
            throw ValidationError(where + ": unknown day '" + word + "'");
        }
    };
    if (value.is_string()) {
        apply_word(value.get<std::string>());
    } else if (value.is_array()) {
        for (const auto& v : value) apply_word(v.get<std::string>());
    } else {
        throw ValidationError(where + ": 'days' must be a string or list");
    }
    return days;
}

} // namespace

Season parse_season(const std::string& name) {
    if (name == "summer") return Season::summer;
    if (name == "winter") return Season::winter;
    throw ValidationError("unknown season '" + name + "' (expected summer or winter)");
}

std::string season_name(Season season) {
    return season == Season::summer ? "summer" : "winter";
}

Period parse_period(const std::string& name) {
    if (name == "off_peak") return Period::off_peak;
    if (name == "part_peak") return Period::part_peak;
    if (name == "peak") return Period::peak;
    throw ValidationError("unknown period '" + name + "'");
}

std::string period_name(Period period) {
    switch (period) {
        case Period::off_peak: return "off_peak";
        case Period::part_peak: return "part_peak";
        case Period::peak: return "peak";
    }
    return "?";
}

std::string demand_category_name(DemandCategory category) {
    switch (category) {
        case DemandCategory::peak: return "peak";
        case DemandCategory::part_peak: return "part_peak";
        case DemandCategory::max: return "max";
    }
    return "?";
}

TouSchedule build_schedule(const std::string& tariff_name, Season season,
                           const std::vector<PeriodRule>& rules,
                           const std::array<double, kPeriodCount>& energy_rates,
                           const std::array<std::optional<double>, kDemandCategoryCount>& demand_rates) {
    const std::string where = tariff_name + "/" + season_name(season);

    for (const auto& rule : rules) {
        if (rule.start_minute % kBillSlotMinutes != 0 || rule.end_minute % kBillSlotMinutes != 0) {
            throw ValidationError(where + ": period rule boundaries must align to 15 minutes");
        }
        if (rule.start_minute >= rule.end_minute || rule.end_minute > kMinutesPerDay) {
            throw ValidationError(where + ": period rule has empty or out-of-range window");
        }
    }

    TouSchedule schedule;
    schedule.tariff_name = tariff_name;
    schedule.season = season;
    schedule.energy_rates = energy_rates;
    schedule.demand_rates = demand_rates;
    schedule.slot_period.assign(kBillSlotsPerWeek, Period::off_peak);

    std::vector<char> covered(kBillSlotsPerWeek, 0);
    for (const auto& rule : rules) {
        for (int day = 0; day < 7; ++day) {
            if (!rule.days[day]) continue;
            for (int minute = rule.start_minute; minute < rule.end_minute;
                 minute += kBillSlotMinutes) {
                int slot = day * kBillSlotsPerDay + minute / kBillSlotMinutes;
                if (covered[slot]) {
                    throw ValidationError(where + ": overlapping period rules at " +
                                          std::string(kDayNames[day]) + " minute " +
                                          std::to_string(minute));
                }
                covered[slot] = 1;
                schedule.slot_period[slot] = rule.period;
            }
        }
    }
    for (int slot = 0; slot < kBillSlotsPerWeek; ++slot) {
        if (!covered[slot]) {
            throw ValidationError(where + ": period rules leave a gap at " +
                                  std::string(kDayNames[slot / kBillSlotsPerDay]) + " minute " +
                                  std::to_string(slot % kBillSlotsPerDay * kBillSlotMinutes));
        }
    }

    for (int p = 0; p < kPeriodCount; ++p) {
        schedule.period_masks[p] = Eigen::ArrayXd::Zero(kBillSlotsPerWeek);
    }
    bool has_peak = false;
    for (int slot = 0; slot < kBillSlotsPerWeek; ++slot) {
        schedule.period_masks[static_cast<int>(schedule.slot_period[slot])][slot] = 1.0;
        has_peak = has_peak || schedule.slot_period[slot] == Period::peak;
    }
    if (season == Season::winter && has_peak) {
        throw ValidationError(where + ": winter schedules must not define a peak period");
    }

    for (int p = 0; p < kPeriodCount; ++p) {
        double rate = energy_rates[p];
        bool used = schedule.period_masks[p].sum() > 0.0;
        if (used && std::isnan(rate)) {
            throw ValidationError(where + ": missing energy rate for used period " +
                                  period_name(static_cast<Period>(p)));
        }
        if (!std::isnan(rate) && rate < 0.0) {
            throw ValidationError(where + ": negative energy rate");
        }
    }
    for (const auto& rate : demand_rates) {
        if (rate && *rate < 0.0) {
            throw ValidationError(where + ": negative demand rate");
        }
    }

    // Grid metrics default to the schedule's own peak window; winter gets a
    // window injected from the tariff-book config instead.
    schedule.metrics_peak_mask = schedule.period_masks[static_cast<int>(Period::peak)];
    return schedule;
}

EnergyCharges energy_charge(const BillingProfile& profile, const TouSchedule& schedule) {
    if (profile.horizon_slots() != schedule.horizon_slots()) {
        throw ValidationError("billing profile has " + std::to_string(profile.horizon_slots()) +
                              " slots but schedule classifies " +
                              std::to_string(schedule.horizon_slots()));
    }
    auto charge_for = [&](Period p) {
        const auto& mask = schedule.period_masks[static_cast<int>(p)];
        if (mask.sum() == 0.0) return 0.0;
        double rate = schedule.energy_rates[static_cast<int>(p)];
        if (std::isnan(rate)) {
            throw ValidationError(schedule.tariff_name + ": slot classified as " + period_name(p) +
                                  " but no energy rate configured");
        }
        return (profile.kw * mask).sum() * kBillSlotHours * rate;
    };
    EnergyCharges charges;
    charges.peak = charge_for(Period::peak);
    charges.part_peak = charge_for(Period::part_peak);
    charges.off_peak = charge_for(Period::off_peak);
    return charges;
}

double demand_charge(const BillingProfile& profile, const TouSchedule& schedule,
                     double proration) {
    if (profile.horizon_slots() != schedule.horizon_slots()) {
        throw ValidationError("billing profile and schedule horizons differ");
    }
    if (!(proration >= 0.0)) {
        throw ValidationError("demand proration must be nonnegative");
    }
    if (profile.horizon_slots() == 0) {
        throw ValidationError("demand charge of an empty profile");
    }
    double charge = 0.0;
    auto add_category = [&](DemandCategory cat, const Eigen::ArrayXd* mask) {
        const auto& rate = schedule.demand_rates[static_cast<int>(cat)];
        if (!rate) return;
        double peak_kw = 0.0;
        if (mask == nullptr) {
            peak_kw = profile.kw.maxCoeff();
        } else {
            if (mask->sum() == 0.0) return;
            peak_kw = (profile.kw * (*mask)).maxCoeff();
        }
        charge += *rate * peak_kw;
    };
    add_category(DemandCategory::peak, &schedule.period_masks[static_cast<int>(Period::peak)]);
    add_category(DemandCategory::part_peak,
                 &schedule.period_masks[static_cast<int>(Period::part_peak)]);
    add_category(DemandCategory::max, nullptr);
    return charge * proration;
}

double station_costs(const StationCostParams& params, double station_count, double billing_days) {
    if (station_count < 0.0) {
        throw ValidationError("station count must be nonnegative");
    }
    if (billing_days < 0.0) {
        throw ValidationError("billing days must be nonnegative");
    }
    return (params.om_annual_usd + params.capital_annualized_usd) * station_count *
           (billing_days / 365.0);
}

CostBreakdown total_cost(const BillingProfile& l2_profile, const BillingProfile& ufc_profile,
                         const TouSchedule& l2_schedule, const TouSchedule& ufc_schedule,
                         double l2_station_count, double ufc_station_count,
                         const StationCostParams& l2_params, const StationCostParams& ufc_params,
                         double billing_days, double demand_proration) {
    EnergyCharges l2_energy = energy_charge(l2_profile, l2_schedule);
    EnergyCharges ufc_energy = energy_charge(ufc_profile, ufc_schedule);

    CostBreakdown cost;
    cost.energy_peak = l2_energy.peak + ufc_energy.peak;
    cost.energy_part_peak = l2_energy.part_peak + ufc_energy.part_peak;
    cost.energy_off_peak = l2_energy.off_peak + ufc_energy.off_peak;
    cost.demand = demand_charge(l2_profile, l2_schedule, demand_proration) +
                  demand_charge(ufc_profile, ufc_schedule, demand_proration);
    cost.om_and_capital = station_costs(l2_params, l2_station_count, billing_days) +
                          station_costs(ufc_params, ufc_station_count, billing_days);
    cost.total = cost.energy_peak + cost.energy_part_peak + cost.energy_off_peak + cost.demand +
                 cost.om_and_capital;
    return cost;
}

const TouSchedule& TariffBook::schedule(const std::string& tariff, Season season) const {
    auto it = schedules.find(tariff);
    if (it == schedules.end()) {
        throw ValidationError("tariff '" + tariff + "' not present in config");
    }
    auto st = it->second.find(season);
    if (st == it->second.end()) {
        throw ValidationError("tariff '" + tariff + "' has no " + season_name(season) +
                              " schedule");
    }
    return st->second;
}

namespace {

std::vector<PeriodRule> parse_rules(const nlohmann::json& array, const std::string& where,
                                    bool with_period) {
    if (!array.is_array() || array.empty()) {
        throw ValidationError(where + ": expected a non-empty rule list");
    }
    std::vector<PeriodRule> rules;
    for (const auto& item : array) {
        PeriodRule rule;
        rule.days = parse_days(item.at("days"), where);
        rule.start_minute = parse_clock_minute(item.at("start").get<std::string>(), where);
        rule.end_minute = parse_clock_minute(item.at("end").get<std::string>(), where);
        if (with_period) {
            rule.period = parse_period(item.at("period").get<std::string>());
        }
        rules.push_back(rule);
    }
    return rules;
}

StationCostParams parse_station_costs(const nlohmann::json& obj, const std::string& where) {
    StationCostParams params;
    params.om_annual_usd = obj.at("om_annual_usd").get<double>();
    params.capital_annualized_usd = obj.at("capital_annualized_usd").get<double>();
    if (params.om_annual_usd < 0.0 || params.capital_annualized_usd < 0.0) {
        throw ValidationError(where + ": station costs must be nonnegative");
    }
    return params;
}

Eigen::ArrayXd window_mask(const std::vector<PeriodRule>& rules) {
    Eigen::ArrayXd mask = Eigen::ArrayXd::Zero(kBillSlotsPerWeek);
    for (const auto& rule : rules) {
        for (int day = 0; day < 7; ++day) {
            if (!rule.days[day]) continue;
            for (int minute = rule.start_minute; minute < rule.end_minute;
                 minute += kBillSlotMinutes) {
                mask[day * kBillSlotsPerDay + minute / kBillSlotMinutes] = 1.0;
            }
        }
    }
    return mask;
}

} // namespace

TariffBook parse_tariffs(const std::string& json_text, const std::string& source_name) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(source_name + ": " + e.what());
    }

    TariffBook book;
    book.config_hash = fnv1a64(json_text);
    try {
        book.total_plugs = doc.value("total_plugs", 3500.0);
        if (!(book.total_plugs >= 0.0)) {
            throw ValidationError(source_name + ": total_plugs must be nonnegative");
        }
        const auto& assignments = doc.at("assignments");
        book.l2_tariff = assignments.at("l2").get<std::string>();
        book.ufc_tariff = assignments.at("ufc").get<std::string>();
        book.l2_costs = parse_station_costs(doc.at("station_costs").at("l2"), source_name);
        book.ufc_costs = parse_station_costs(doc.at("station_costs").at("ufc"), source_name);

        Eigen::ArrayXd metrics_mask;
        if (doc.contains("metrics_peak_window")) {
            auto rules = parse_rules(doc.at("metrics_peak_window"),
                                     source_name + "/metrics_peak_window", false);
            metrics_mask = window_mask(rules);
        }

        for (const auto& [tariff_name, seasons] : doc.at("tariffs").items()) {
            for (const auto& [season_key, body] : seasons.items()) {
                Season season = parse_season(season_key);
                auto rules = parse_rules(body.at("periods"),
                                         tariff_name + "/" + season_key + "/periods", true);

                std::array<double, kPeriodCount> energy_rates{kNaN, kNaN, kNaN};
                for (const auto& [period_key, rate] : body.at("energy_rates_usd_per_kwh").items()) {
                    energy_rates[static_cast<int>(parse_period(period_key))] = rate.get<double>();
                }

                std::array<std::optional<double>, kDemandCategoryCount> demand_rates;
                if (body.contains("demand_rates_usd_per_kw")) {
                    for (const auto& [cat_key, rate] : body.at("demand_rates_usd_per_kw").items()) {
                        int idx;
                        if (cat_key == "peak") {
                            idx = static_cast<int>(DemandCategory::peak);
                        } else if (cat_key == "part_peak") {
                            idx = static_cast<int>(DemandCategory::part_peak);
                        } else if (cat_key == "max") {
                            idx = static_cast<int>(DemandCategory::max);
                        } else {
                            throw ValidationError(tariff_name + ": unknown demand category '" +
                                                  cat_key + "'");
                        }
                        demand_rates[idx] = rate.get<double>();
                    }
                }

                TouSchedule schedule =
                    build_schedule(tariff_name, season, rules, energy_rates, demand_rates);
                if (season == Season::winter && metrics_mask.size() > 0) {
                    schedule.metrics_peak_mask = metrics_mask;
                }
                book.schedules[tariff_name].emplace(season, std::move(schedule));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(source_name + ": " + e.what());
    }

    if (book.schedules.find(book.l2_tariff) == book.schedules.end()) {
        throw ValidationError(source_name + ": l2 assignment '" + book.l2_tariff +
                              "' has no tariff definition");
    }
    if (book.schedules.find(book.ufc_tariff) == book.schedules.end()) {
        throw ValidationError(source_name + ": ufc assignment '" + book.ufc_tariff +
                              "' has no tariff definition");
    }
    return book;
}

TariffBook load_tariffs(const std::string& path) {
    return parse_tariffs(slurp_file(path), path);
}

} // namespace ufcsim
