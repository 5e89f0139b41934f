#include "ufcsim/report.hpp"

#include "ufcsim/io_util.hpp"
#include "ufcsim/time_grid.hpp"

#include <json.hpp>

#include <sstream>

namespace ufcsim {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string hash_comment(const std::string& config_hash) {
    return "# config_hash=" + config_hash + "\n";
}

ordered_json cost_json(const CostBreakdown& cost) {
    ordered_json j;
    j["energy_peak_usd"] = cost.energy_peak;
    j["energy_part_peak_usd"] = cost.energy_part_peak;
    j["energy_off_peak_usd"] = cost.energy_off_peak;
    j["demand_usd"] = cost.demand;
    j["om_and_capital_usd"] = cost.om_and_capital;
    j["total_usd"] = cost.total;
    return j;
}

ordered_json scenario_json(const ScenarioResult& result) {
    ordered_json j;
    j["ufc_share"] = result.ufc_share;
    j["cost"] = cost_json(result.cost);
    ordered_json ev;
    for (const auto& [label, total] : result.ev_user_totals) {
        ev[label] = total;
    }
    j["ev_user_total_usd"] = ev;
    j["peak_period_energy_kwh"] = result.grid.peak_period_energy_kwh;
    j["observed_peak_kw"] = result.grid.observed_peak_kw;
    j["weekly_energy_kwh"] = result.weekly_energy_kwh;
    j["weekly_arrivals"] = result.weekly_arrivals;
    return j;
}

ordered_json meta_json(Season season, const std::string& config_hash) {
    ordered_json meta;
    meta["config_hash"] = config_hash;
    meta["season"] = season_name(season);
    // Winter tariffs define no peak period; metrics fall back to the
    // configured clock window (the summer peak hours by default).
    meta["peak_window"] = "schedule peak period, or configured metrics window when absent";
    return meta;
}

} // namespace

std::string profile_csv_text(const Eigen::ArrayXd& kw, int slot_minutes,
                             const std::string& config_hash) {
    std::ostringstream out;
    out << hash_comment(config_hash);
    out << "slot_start_minute,kw\n";
    for (Eigen::Index i = 0; i < kw.size(); ++i) {
        out << i * slot_minutes << "," << format_double(kw[i]) << "\n";
    }
    return out.str();
}

std::string sweep_csv_text(const std::vector<ScenarioResult>& results,
                           const std::string& config_hash) {
    std::ostringstream out;
    out << hash_comment(config_hash);
    out << "share,energy_peak,energy_part_peak,energy_off_peak,demand,om,total";
    if (!results.empty()) {
        for (const auto& [label, total] : results.front().ev_user_totals) {
            out << ",ev_user_total_" << label;
        }
    }
    out << ",peak_period_energy,observed_peak\n";
    for (const auto& r : results) {
        out << format_double(r.ufc_share) << "," << format_double(r.cost.energy_peak) << ","
            << format_double(r.cost.energy_part_peak) << ","
            << format_double(r.cost.energy_off_peak) << "," << format_double(r.cost.demand) << ","
            << format_double(r.cost.om_and_capital) << "," << format_double(r.cost.total);
        for (const auto& [label, total] : r.ev_user_totals) {
            out << "," << format_double(total);
        }
        out << "," << format_double(r.grid.peak_period_energy_kwh) << ","
            << format_double(r.grid.observed_peak_kw) << "\n";
    }
    return out.str();
}

std::string scenario_json_text(const ScenarioResult& result, Season season,
                               const std::string& config_hash) {
    ordered_json j;
    j["meta"] = meta_json(season, config_hash);
    j.update(scenario_json(result));
    return j.dump(2) + "\n";
}

std::string sweep_summary_json_text(const std::vector<ScenarioResult>& results, Season season,
                                    const std::string& config_hash) {
    ordered_json j;
    j["meta"] = meta_json(season, config_hash);
    j["steps"] = results.size();
    ordered_json scenarios = ordered_json::array();
    for (const auto& r : results) {
        scenarios.push_back(scenario_json(r));
    }
    j["scenarios"] = std::move(scenarios);
    return j.dump(2) + "\n";
}

std::string dispatch_csv_text(const Eigen::ArrayXd& load_kw, const DispatchPlan& plan,
                              const std::string& config_hash) {
    std::ostringstream out;
    out << hash_comment(config_hash);
    out << "slot,load_kw,battery_kw,grid_kw,soc_kwh\n";
    for (Eigen::Index t = 0; t < plan.slots(); ++t) {
        double grid = load_kw[t] - plan.battery_kw[t];
        out << t << "," << format_double(load_kw[t]) << "," << format_double(plan.battery_kw[t])
            << "," << format_double(grid) << "," << format_double(plan.soc_kwh[t + 1]) << "\n";
    }
    return out.str();
}

std::string distribution_json_text(const RatingDistribution& distribution, int skipped,
                                   const std::string& config_hash) {
    ordered_json j;
    j["meta"]["config_hash"] = config_hash;
    j["total_plugs"] = distribution.total_plugs;
    j["modal_rating_kw"] = distribution.modal_rating_kw;
    j["skipped_records"] = skipped;
    ordered_json bins = ordered_json::array();
    for (const auto& bin : distribution.bins) {
        ordered_json b;
        b["rating_kw"] = bin.rating_kw;
        b["plugs"] = bin.plugs;
        b["share"] = bin.share;
        bins.push_back(std::move(b));
    }
    j["bins"] = std::move(bins);
    return j.dump(2) + "\n";
}

} // namespace ufcsim
