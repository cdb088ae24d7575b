// Command-line front end: run a figure preset or a custom scenario from a
// config file, write a CSV/JSON table, and print a short summary.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "rtxd/harness.hpp"
#include "rtxd/presets.hpp"
#include "rtxd/table.hpp"

namespace {

using nlohmann::json;
using namespace rtxd;

struct RunConfig {
    std::string preset_name;                 // empty for custom runs
    std::optional<ScenarioRecipe> custom;
    std::string out_path;                    // empty = stdout
    std::string format = "csv";
    std::uint64_t seed = 1;
    std::int64_t trials = 100'000;
    std::string termination = "run";
    int workers = 1;
};

[[noreturn]] void config_error(const std::string& message) {
    throw CLI::ValidationError("config", message);
}

double parse_number(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) config_error(key + ": not a number: '" + text + "'");
        return v;
    } catch (const std::logic_error&) {
        config_error(key + ": not a number: '" + text + "'");
    }
}

std::int64_t parse_integer(const std::string& key, const std::string& text) {
    const double v = parse_number(key, text);
    const auto i = static_cast<std::int64_t>(std::llround(v));
    if (static_cast<double>(i) != v) config_error(key + ": expected an integer, got '" + text + "'");
    return i;
}

Scheme parse_scheme(const std::string& text) {
    if (text == "pdma") return Scheme::pdma;
    if (text == "rdma") return Scheme::rdma;
    if (text == "nosic") return Scheme::nosic_baseline;
    if (text == "repetition") return Scheme::repetition_baseline;
    if (text == "oma") return Scheme::oma_reference;
    config_error("scheme: unknown value '" + text + "'");
}

// Flat key = value document mirroring the scenario fields.
ScenarioRecipe parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) config_error("cannot open config file: " + path);

    ScenarioRecipe recipe;
    bool design_set = false;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        if (trim(line).empty()) continue;
        if (eq == std::string::npos)
            config_error("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty()) config_error(key + ": missing value");

        if (key == "scheme") {
            recipe.scheme = parse_scheme(value);
        } else if (key == "design") {
            if (value == "power") recipe.design = DesignKind::power;
            else if (value == "rate") recipe.design = DesignKind::rate;
            else config_error("design: unknown value '" + value + "'");
            design_set = true;
        } else if (key == "population") {
            const auto v = parse_integer(key, value);
            if (v < 0) config_error("population out of range");
            recipe.population = static_cast<int>(v);
        } else if (key == "access_prob") {
            const double v = parse_number(key, value);
            if (!(v >= 0.0 && v <= 1.0)) config_error("access_prob out of range [0,1]");
            recipe.access_prob = v;
        } else if (key == "mean_gain") {
            const double v = parse_number(key, value);
            if (!(v > 0.0)) config_error("mean_gain out of range (must be > 0)");
            recipe.mean_gain = v;
        } else if (key == "rate") {
            const double v = parse_number(key, value);
            if (!(v > 0.0)) config_error("rate out of range (must be > 0)");
            recipe.rate = v;
        } else if (key == "frame_budget") {
            const double v = parse_number(key, value);
            if (!(v >= 1.0)) config_error("frame_budget out of range (must be >= 1)");
            recipe.frame_budget = v;
        } else if (key == "levels") {
            const auto v = parse_integer(key, value);
            if (v < 1) config_error("levels out of range (must be >= 1)");
            recipe.levels = static_cast<int>(v);
        } else if (key == "drop_prob") {
            const double v = parse_number(key, value);
            if (!(v >= 0.0 && v < 1.0)) config_error("drop_prob out of range [0,1)");
            recipe.drop_prob = v;
        } else if (key == "mean_rx_power") {
            const double v = parse_number(key, value);
            if (!(v > 0.0)) config_error("mean_rx_power out of range (must be > 0)");
            recipe.mean_rx_power = v;
        } else if (key == "budget") {
            const auto v = parse_integer(key, value);
            if (v < 1) config_error("budget out of range (must be >= 1)");
            recipe.budget = v;
        } else if (key == "margin") {
            const double v = parse_number(key, value);
            if (!(v > 0.0)) config_error("margin out of range (must be > 0)");
            recipe.margin = v;
        } else if (key == "safety_cap") {
            const auto v = parse_integer(key, value);
            if (v < 1) config_error("safety_cap out of range (must be >= 1)");
            recipe.safety_cap = v;
        } else if (key == "termination") {
            if (value == "run") recipe.termination = TerminationPolicy::Mode::run_to_completion;
            else if (value == "truncate") recipe.termination = TerminationPolicy::Mode::truncate_at_budget;
            else config_error("termination: unknown value '" + value + "'");
        } else if (key == "trials") {
            const auto v = parse_integer(key, value);
            if (v < 1) config_error("trials out of range (must be >= 1)");
            recipe.trials = v;
        } else if (key == "seed") {
            recipe.seed = static_cast<std::uint64_t>(parse_integer(key, value));
        } else if (key == "include_empty_frames") {
            recipe.include_empty_frames = value == "true" || value == "1";
        } else {
            config_error("unknown key: " + key);
        }
    }
    if (!design_set)
        recipe.design = (recipe.scheme == Scheme::rdma || recipe.scheme == Scheme::oma_reference)
                            ? DesignKind::rate
                            : DesignKind::power;
    return recipe;
}

json echo_config(const RunConfig& cfg) {
    json j;
    j["command"] = cfg.preset_name.empty() ? "custom" : "preset";
    if (!cfg.preset_name.empty()) j["preset"] = cfg.preset_name;
    j["seed"] = cfg.seed;
    j["trials"] = cfg.trials;
    j["workers"] = cfg.workers;
    j["termination"] = cfg.termination;
    j["format"] = cfg.format;
    j["out"] = cfg.out_path;
    if (cfg.custom) {
        const ScenarioRecipe& r = *cfg.custom;
        json s;
        s["scheme"] = scheme_name(r.scheme);
        s["design"] = r.design == DesignKind::power ? "power" : "rate";
        s["population"] = r.population;
        s["access_prob"] = r.access_prob;
        s["mean_gain"] = r.mean_gain;
        if (r.design == DesignKind::power) {
            s["rate"] = r.rate;
            s["frame_budget"] = r.frame_budget;
            s["drop_prob"] = r.drop_prob;
        } else {
            s["mean_rx_power"] = r.mean_rx_power;
            s["budget"] = r.budget;
            if (r.margin) s["margin"] = *r.margin;
            else s["margin"] = "auto";
        }
        s["levels"] = r.levels;
        s["safety_cap"] = r.safety_cap;
        s["include_empty_frames"] = r.include_empty_frames;
        j["scenario"] = s;
    }
    return j;
}

std::string render_json_output(const RunConfig& cfg, const ResultTable& table) {
    json j;
    j["config"] = echo_config(cfg);
    j["columns"] = table.columns;
    json rows = json::array();
    for (const auto& row : table.rows) {
        json r = json::array();
        for (const auto& cell : row) {
            if (const auto* i = std::get_if<std::int64_t>(&cell)) r.push_back(*i);
            else if (const auto* d = std::get_if<double>(&cell)) r.push_back(*d);
            else r.push_back(std::get<std::string>(cell));
        }
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    return j.dump(2) + "\n";
}

void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
        out << content;
        if (!out.flush()) throw std::runtime_error("write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw std::runtime_error("rename to " + path + " failed: " + ec.message());
}

void print_summary(const RunConfig& cfg, const ResultTable& table) {
    std::ostream& os = std::cout;
    if (!cfg.preset_name.empty())
        os << "preset " << cfg.preset_name;
    else
        os << "custom scenario";
    os << "  seed=" << cfg.seed << "  workers=" << cfg.workers;
    if (cfg.preset_name != "fig2") os << "  trials/point=" << cfg.trials;
    os << "\n";

    if (table.columns == sweep_columns()) {
        // headline per (scheme, param): mean frame length and power at the
        // final sweep point
        std::string last_group;
        const std::vector<Cell>* last_row = nullptr;
        auto flush = [&](void) {
            if (!last_row) return;
            const auto& r = *last_row;
            os << "  " << std::get<std::string>(r[2]) << "  " << std::get<std::string>(r[0])
               << "=" << format_cell(r[1]) << ": frame " << format_cell(r[3]) << " +/- "
               << format_cell(r[4]) << ", power " << format_cell(r[5]) << " +/- "
               << format_cell(r[6]) << ", collisions " << format_cell(r[7]) << "\n";
        };
        for (const auto& row : table.rows) {
            const std::string group =
                std::get<std::string>(row[2]) + "/" + std::get<std::string>(row[0]);
            if (group != last_group && last_row) flush();
            last_group = group;
            last_row = &row;
        }
        flush();
    } else {
        os << "  " << table.rows.size() << " analytic rows (" << table.columns.size()
           << " columns)\n";
    }

    if (cfg.custom && cfg.custom->design == DesignKind::power) {
        const double gamma = pdma::gamma_for_budget(cfg.custom->rate, cfg.custom->frame_budget);
        os << "  analytic frame bound: " << pdma::frame_bound(cfg.custom->rate, gamma)
           << " slots at rate " << cfg.custom->rate << "\n";
    }
}

int execute(RunConfig cfg) {
    ResultTable table;
    if (!cfg.preset_name.empty()) {
        const FigurePreset preset = figure_preset(cfg.preset_name);
        RunOverrides overrides;
        overrides.seed = cfg.seed;
        overrides.trials = cfg.trials;
        overrides.termination = cfg.termination == "truncate"
                                    ? TerminationPolicy::Mode::truncate_at_budget
                                    : TerminationPolicy::Mode::run_to_completion;
        overrides.workers = cfg.workers;
        table = run_preset(preset, overrides);
    } else {
        ScenarioRecipe recipe = *cfg.custom;
        recipe.seed = cfg.seed;
        recipe.trials = cfg.trials;
        recipe.termination = cfg.termination == "truncate"
                                 ? TerminationPolicy::Mode::truncate_at_budget
                                 : TerminationPolicy::Mode::run_to_completion;
        cfg.custom = recipe;
        const SummaryStats stats = run_scenario(build_scenario(recipe), cfg.workers);
        table.columns = sweep_columns();
        table.rows.push_back({std::string("custom"), 0.0, scheme_name(recipe.scheme),
                              stats.mean_frame_length, stats.stderr_frame_length,
                              stats.mean_tx_power, stats.stderr_tx_power,
                              stats.collision_rate, stats.overflow_rate, stats.silent_rate,
                              stats.spectral_efficiency, stats.truncation_rate});
    }

    const std::string content =
        cfg.format == "json" ? render_json_output(cfg, table) : render_csv(table);
    print_summary(cfg, table);
    if (cfg.out_path.empty()) {
        std::cout << content;
    } else {
        write_atomic(cfg.out_path, content);
        std::cout << "  wrote " << cfg.out_path << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Slot-level simulator and analytic tables for SIC + HARQ-IR random access"};

    RunConfig cfg;
    std::string config_path;
    auto* preset_opt =
        app.add_option("--preset", cfg.preset_name,
                       "figure preset to run (fig2..fig9)");
    auto* config_opt = app.add_option("--config", config_path,
                                      "scenario config file (flat key = value)");
    preset_opt->excludes(config_opt);
    config_opt->excludes(preset_opt);
    bool seed_given = false, trials_given = false, term_given = false;
    app.add_option("--seed", cfg.seed, "master seed (default 1)")
        ->each([&](const std::string&) { seed_given = true; });
    app.add_option("--trials", cfg.trials, "trials per sweep point (default 100000)")
        ->each([&](const std::string&) { trials_given = true; });
    app.add_option("--workers", cfg.workers, "worker threads (default 1)")
        ->check(CLI::Range(1, 4096));
    app.add_option("--format", cfg.format, "output format: csv or json (default csv)")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--out", cfg.out_path, "output path (default: stdout)");
    app.add_option("--termination", cfg.termination,
                   "run (to completion) or truncate (at the budget)")
        ->check(CLI::IsMember({"run", "truncate"}))
        ->each([&](const std::string&) { term_given = true; });

    if (argc <= 1) {
        std::cout << app.help();
        return 2;
    }
    try {
        app.parse(argc, argv);
        if (cfg.preset_name.empty() && config_path.empty())
            config_error("one of --preset or --config is required");
        if (!cfg.preset_name.empty()) {
            figure_preset(cfg.preset_name);  // reject unknown names early
        } else {
            const ScenarioRecipe recipe = parse_scenario_file(config_path);
            if (!seed_given) cfg.seed = recipe.seed;
            if (!trials_given) cfg.trials = recipe.trials;
            if (!term_given)
                cfg.termination =
                    recipe.termination == TerminationPolicy::Mode::truncate_at_budget
                        ? "truncate"
                        : "run";
            cfg.custom = recipe;
        }
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        return execute(std::move(cfg));
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
