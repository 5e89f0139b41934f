#include "ufcsim/arrivals.hpp"
#include "ufcsim/errors.hpp"
#include "ufcsim/io_util.hpp"
#include "ufcsim/objectives.hpp"
#include "ufcsim/peakshave.hpp"
#include "ufcsim/report.hpp"
#include "ufcsim/stations.hpp"
#include "ufcsim/sweep.hpp"
#include "ufcsim/tariff.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace {

using namespace ufcsim;

struct CommonOptions {
    std::string arrivals_path;
    std::string tariffs_path;
    std::string season_name = "summer";
    std::string out_dir;
    double ufc_share = 0.0;
    double demand_proration = 1.0;
    double l2_kw = 3.0;
    double ufc_kw = 900.0;
    double session_kwh = 60.0;
    std::vector<std::string> vot_specs;
};

std::vector<VotModel> parse_vot_specs(const std::vector<std::string>& specs) {
    if (specs.empty()) {
        return default_vot_models();
    }
    std::vector<VotModel> models;
    for (const auto& spec : specs) {
        auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ValidationError("VOT spec must look like label=rate, got '" + spec + "'");
        }
        VotModel model;
        model.label = spec.substr(0, eq);
        model.rate_usd_per_hour = parse_double_field(spec.substr(eq + 1), "--vot", 0);
        if (model.rate_usd_per_hour < 0.0) {
            throw ValidationError("VOT rate must be nonnegative: " + spec);
        }
        models.push_back(std::move(model));
    }
    return models;
}

ScenarioContext make_context(const CommonOptions& opt, const TariffBook& book,
                             std::vector<VotModel> vot_models) {
    ScenarioContext ctx;
    ctx.book = &book;
    ctx.season = parse_season(opt.season_name);
    ctx.l2 = ChargerTech{opt.l2_kw, opt.session_kwh, "L2"};
    ctx.ufc = ChargerTech{opt.ufc_kw, opt.session_kwh, "UFC"};
    ctx.vot_models = std::move(vot_models);
    ctx.demand_proration = opt.demand_proration;
    return ctx;
}

std::string run_hash(const CommonOptions& opt, const TariffBook& book,
                     const std::string& command) {
    std::ostringstream canon;
    canon << command << "|arrivals=" << opt.arrivals_path << "|season=" << opt.season_name
          << "|share=" << format_double(opt.ufc_share)
          << "|proration=" << format_double(opt.demand_proration)
          << "|l2=" << format_double(opt.l2_kw) << "|ufc=" << format_double(opt.ufc_kw)
          << "|session=" << format_double(opt.session_kwh)
          << "|tariffs=" << hash_hex(book.config_hash);
    for (const auto& v : opt.vot_specs) {
        canon << "|vot=" << v;
    }
    return hash_hex(fnv1a64(canon.str()));
}

std::string out_path(const std::string& dir, const std::string& file) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / file).string();
}

void add_common_flags(CLI::App* cmd, CommonOptions& opt, bool with_share) {
    cmd->add_option("--arrivals", opt.arrivals_path, "Arrival CSV (slot,count or hour,count)")
        ->required();
    cmd->add_option("--tariffs", opt.tariffs_path, "Tariff config JSON")->required();
    cmd->add_option("--season", opt.season_name, "summer or winter");
    cmd->add_option("--demand-proration", opt.demand_proration,
                    "Scale factor on monthly demand rates (e.g. 0.2333 for 7/30)");
    cmd->add_option("--l2-kw", opt.l2_kw, "Level-2 rating in kW");
    cmd->add_option("--ufc-kw", opt.ufc_kw, "Ultra-fast rating in kW");
    cmd->add_option("--session-kwh", opt.session_kwh, "Energy per charging session");
    cmd->add_option("--vot", opt.vot_specs, "VOT model as label=rate; repeatable");
    if (with_share) {
        cmd->add_option("--share", opt.ufc_share, "UFC share of arrivals in [0,1]")->required();
    }
}

int cmd_simulate(const CommonOptions& opt) {
    ArrivalProfile arrivals = load_arrivals(opt.arrivals_path);
    TariffBook book = load_tariffs(opt.tariffs_path);
    ScenarioContext ctx = make_context(opt, book, parse_vot_specs(opt.vot_specs));
    std::string hash = run_hash(opt, book, "simulate");

    PureProfiles pure = make_pure_profiles(arrivals, ctx.l2, ctx.ufc);
    ScenarioResult result = evaluate_scenario(ctx, pure, opt.ufc_share);

    PowerProfile blended{(1.0 - opt.ufc_share) * pure.l2_power.kw +
                         opt.ufc_share * pure.ufc_power.kw};
    BillingProfile billing{(1.0 - opt.ufc_share) * pure.l2_billing.kw +
                           opt.ufc_share * pure.ufc_billing.kw};

    write_text_file(out_path(opt.out_dir, "profile_4min.csv"),
                    profile_csv_text(blended.kw, kSimSlotMinutes, hash));
    write_text_file(out_path(opt.out_dir, "billing_15min.csv"),
                    profile_csv_text(billing.kw, kBillSlotMinutes, hash));
    write_text_file(out_path(opt.out_dir, "scenario.json"),
                    scenario_json_text(result, ctx.season, hash));
    std::cout << "simulated share " << format_double(opt.ufc_share) << " ("
              << season_name(ctx.season) << "): total cost $" << format_double(result.cost.total)
              << ", observed peak " << format_double(result.grid.observed_peak_kw) << " kW\n";
    return 0;
}

int cmd_sweep(const CommonOptions& opt, int steps, int jobs) {
    ArrivalProfile arrivals = load_arrivals(opt.arrivals_path);
    TariffBook book = load_tariffs(opt.tariffs_path);
    ScenarioContext ctx = make_context(opt, book, parse_vot_specs(opt.vot_specs));
    std::string hash = run_hash(opt, book, "sweep|steps=" + std::to_string(steps));

    std::vector<ScenarioResult> results = run_sweep(ctx, arrivals, steps, jobs);
    std::string season = season_name(ctx.season);
    write_text_file(out_path(opt.out_dir, "sweep_" + season + ".csv"),
                    sweep_csv_text(results, hash));
    write_text_file(out_path(opt.out_dir, "sweep_" + season + "_summary.json"),
                    sweep_summary_json_text(results, ctx.season, hash));
    std::cout << "swept " << steps << " shares (" << season << "); total cost $"
              << format_double(results.front().cost.total) << " -> $"
              << format_double(results.back().cost.total) << "\n";
    return 0;
}

int cmd_tipping_point(const CommonOptions& opt, bool energy_only) {
    ArrivalProfile arrivals = load_arrivals(opt.arrivals_path);
    TariffBook book = load_tariffs(opt.tariffs_path);

    for (Season season : {Season::summer, Season::winter}) {
        CommonOptions seasonal = opt;
        seasonal.season_name = season_name(season);
        ScenarioContext ctx = make_context(seasonal, book, parse_vot_specs(opt.vot_specs));
        TippingInputs inputs = tipping_inputs(ctx, arrivals, energy_only);
        double tipping =
            vot_tipping_point(inputs.cost_at_share0, inputs.cost_at_share1,
                              inputs.weekly_arrivals, session_duration_hours(ctx.l2),
                              session_duration_hours(ctx.ufc));
        std::cout << season_name(season) << ": $" << format_double(tipping) << "/hour\n";
    }
    return 0;
}

int cmd_peak_shave(const CommonOptions& opt, double battery_kwh, double battery_kw,
                   double efficiency, double initial_soc, bool has_initial_soc,
                   const std::string& objective, bool free_terminal) {
    if (!(efficiency > 0.0) || efficiency > 1.0) {
        throw ValidationError("efficiency must lie in (0,1]");
    }
    if (objective != "peak" && objective != "cost") {
        throw ValidationError("objective must be 'peak' or 'cost'");
    }
    ArrivalProfile arrivals = load_arrivals(opt.arrivals_path);
    TariffBook book = load_tariffs(opt.tariffs_path);
    ScenarioContext ctx = make_context(opt, book, parse_vot_specs(opt.vot_specs));
    std::string hash = run_hash(opt, book,
                                "peak-shave|objective=" + objective +
                                    "|kwh=" + format_double(battery_kwh) +
                                    "|kw=" + format_double(battery_kw) +
                                    "|eff=" + format_double(efficiency));

    PureProfiles pure = make_pure_profiles(arrivals, ctx.l2, ctx.ufc);
    BillingProfile load{(1.0 - opt.ufc_share) * pure.l2_billing.kw +
                        opt.ufc_share * pure.ufc_billing.kw};

    Battery battery = Battery::symmetric(battery_kwh, battery_kw, battery_kw, efficiency,
                                         has_initial_soc ? initial_soc : battery_kwh / 2.0);
    validate(battery);
    bool cyclic = !free_terminal;

    nlohmann::ordered_json summary;
    summary["meta"]["config_hash"] = hash;
    summary["meta"]["season"] = season_name(ctx.season);
    summary["objective"] = objective;
    summary["battery_kwh"] = battery.capacity_kwh;
    summary["battery_kw"] = battery.max_discharge_kw;
    summary["round_trip_efficiency"] = battery.round_trip_efficiency();
    summary["initial_soc_kwh"] = battery.initial_soc_kwh;
    summary["cyclic"] = cyclic;
    summary["original_peak_kw"] = load.kw.maxCoeff();

    DispatchPlan plan;
    if (objective == "peak") {
        PeakShaveResult result = min_peak_dispatch(load, battery, cyclic);
        summary["achieved_peak_kw"] = result.achieved_peak_kw;
        plan = std::move(result.plan);
        std::cout << "peak " << format_double(load.kw.maxCoeff()) << " kW -> "
                  << format_double(summary["achieved_peak_kw"].get<double>()) << " kW\n";
    } else {
        const TouSchedule& schedule = book.ufc_schedule(ctx.season);
        CostShaveResult result = min_cost_dispatch(load, battery, schedule,
                                                   opt.demand_proration, cyclic);
        BillingProfile unshaved_cost_profile = load;
        EnergyCharges unshaved_energy = energy_charge(unshaved_cost_profile, schedule);
        double unshaved_total = unshaved_energy.total() +
                                demand_charge(unshaved_cost_profile, schedule,
                                              opt.demand_proration);
        summary["unshaved_cost_usd"] = unshaved_total;
        summary["shaved_cost_usd"] = result.cost.total;
        summary["achieved_peak_kw"] = (load.kw - result.plan.battery_kw).maxCoeff();
        plan = std::move(result.plan);
        std::cout << "cost $" << format_double(unshaved_total) << " -> $"
                  << format_double(summary["shaved_cost_usd"].get<double>()) << "\n";
    }

    write_text_file(out_path(opt.out_dir, "dispatch.csv"),
                    dispatch_csv_text(load.kw, plan, hash));
    write_text_file(out_path(opt.out_dir, "shave_summary.json"), summary.dump(2) + "\n");
    return 0;
}

int cmd_ingest_stations(const std::string& source, const std::string& mapping_path,
                        const std::string& out_file) {
    InventoryFieldMapping mapping;
    if (!mapping_path.empty()) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(slurp_file(mapping_path));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(mapping_path + ": " + std::string(e.what()));
        }
        mapping.rating_field = doc.value("rating_field", mapping.rating_field);
        mapping.plug_count_field = doc.value("plug_count_field", mapping.plug_count_field);
        mapping.id_field = doc.value("id_field", mapping.id_field);
    }
    const char* api_key = std::getenv("UFCSIM_API_KEY");
    Inventory inventory = fetch_inventory(source, mapping, api_key ? api_key : "");
    RatingDistribution distribution = rating_distribution(inventory.records);

    std::string hash = hash_hex(fnv1a64("ingest|" + source + "|" + mapping.rating_field + "|" +
                                        mapping.plug_count_field));
    std::string text = distribution_json_text(distribution, inventory.skipped, hash);
    if (out_file.empty()) {
        std::cout << text;
    } else {
        std::filesystem::path path(out_file);
        if (path.has_parent_path()) {
            std::filesystem::create_directories(path.parent_path());
        }
        write_text_file(out_file, text);
        std::cout << "modal rating " << format_double(distribution.modal_rating_kw) << " kW over "
                  << format_double(distribution.total_plugs) << " plugs ("
                  << inventory.skipped << " records skipped)\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"EV charging replacement simulator: load synthesis, TOU billing, "
                 "stakeholder sweeps, and battery peak shaving"};
    app.set_config("--config", "",
                   "Options file with one [section] per subcommand; flags override");
    app.require_subcommand(1);

    CommonOptions sim_opt;
    auto* simulate = app.add_subcommand("simulate", "Evaluate one UFC share");
    add_common_flags(simulate, sim_opt, true);
    simulate->add_option("--out", sim_opt.out_dir, "Output directory")->required();

    CommonOptions sweep_opt;
    int steps = 11;
    int jobs = 1;
    auto* sweep = app.add_subcommand("sweep", "Evaluate shares from 0 to 1");
    add_common_flags(sweep, sweep_opt, false);
    sweep->add_option("--out", sweep_opt.out_dir, "Output directory")->required();
    sweep->add_option("--steps", steps, "Number of shares (default 11)");
    sweep->add_option("--jobs", jobs, "Worker threads");

    CommonOptions tip_opt;
    bool energy_only = false;
    auto* tipping = app.add_subcommand("tipping-point", "VOT rate equalizing shares 0 and 1");
    add_common_flags(tipping, tip_opt, false);
    tipping->add_flag("--energy-only", energy_only, "Compare energy charges only");

    CommonOptions shave_opt;
    double battery_kwh = 0.0;
    double battery_kw = 0.0;
    double efficiency = 1.0;
    double initial_soc = 0.0;
    std::string objective = "peak";
    bool free_terminal = false;
    auto* shave = app.add_subcommand("peak-shave", "Battery dispatch against the blended load");
    add_common_flags(shave, shave_opt, true);
    shave->add_option("--out", shave_opt.out_dir, "Output directory")->required();
    shave->add_option("--battery-kwh", battery_kwh, "Battery capacity")->required();
    shave->add_option("--battery-kw", battery_kw, "Battery charge/discharge power limit")
        ->required();
    shave->add_option("--efficiency", efficiency, "Round-trip efficiency in (0,1]");
    auto* soc_opt = shave->add_option("--initial-soc-kwh", initial_soc,
                                      "Initial state of charge (default: half capacity)");
    shave->add_option("--objective", objective, "peak or cost");
    shave->add_flag("--free-terminal", free_terminal,
                    "Drop the cyclic terminal SoC constraint");

    std::string source;
    std::string mapping_path;
    std::string ingest_out;
    auto* ingest = app.add_subcommand("ingest-stations", "Summarize a charger inventory");
    ingest->add_option("--source", source, "Inventory JSON file or http(s) URL")->required();
    ingest->add_option("--mapping", mapping_path, "Field-name mapping JSON");
    ingest->add_option("--out", ingest_out, "Output JSON file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) {
            return cmd_simulate(sim_opt);
        }
        if (sweep->parsed()) {
            return cmd_sweep(sweep_opt, steps, jobs);
        }
        if (tipping->parsed()) {
            return cmd_tipping_point(tip_opt, energy_only);
        }
        if (shave->parsed()) {
            return cmd_peak_shave(shave_opt, battery_kwh, battery_kw, efficiency, initial_soc,
                                  soc_opt->count() > 0, objective, free_terminal);
        }
        if (ingest->parsed()) {
            return cmd_ingest_stations(source, mapping_path, ingest_out);
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const FetchError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
