#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtxd/harness.hpp"
#include "rtxd/rdma.hpp"
#include "rtxd/table.hpp"

namespace rtxd {

/// One sweep of one scheme inside a figure preset.
struct PresetRow {
    ScenarioRecipe recipe;
    std::string param;
    std::vector<double> values;
};

struct FigurePreset {
    std::string name;
    std::string description;
    bool analytic = false;  // computed from closed forms, no simulation
    std::vector<PresetRow> rows;
};

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> trials;
    std::optional<TerminationPolicy::Mode> termination;
    int workers = 1;
};

inline const std::vector<std::string>& sweep_columns() {
    static const std::vector<std::string> columns = {
        "param",          "value",          "scheme",        "mean_frame_len",
        "stderr_frame_len", "mean_tx_power", "stderr_tx_power", "collision_rate",
        "overflow_rate",  "silent_rate",    "spectral_eff",  "truncation_rate"};
    return columns;
}

inline std::vector<std::string> preset_names() {
    return {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"};
}

inline FigurePreset figure_preset(const std::string& name) {
    auto stepped = [](double lo, double hi, double step) {
        std::vector<double> v;
        for (double x = lo; x <= hi + 1e-9; x += step) v.push_back(x);
        return v;
    };

    ScenarioRecipe power_base;  // gamma = 0 dB, K = 50, p_a = 0.1, R = 4, budget 10 slots
    power_base.design = DesignKind::power;

    ScenarioRecipe rate_base;
    rate_base.design = DesignKind::rate;
    rate_base.mean_rx_power = 2.0;  // 3 dB
    rate_base.budget = 10;

    FigurePreset preset;
    preset.name = name;
    if (name == "fig2") {
        preset.description = "psi_L(U) vs psi_1(LU) for L = 1..16 at U = 2 (analytic)";
        preset.analytic = true;
        return preset;
    }
    if (name == "fig3") {
        preset.description = "mean frame length vs level count, power-domain design";
        for (Scheme s : {Scheme::pdma, Scheme::nosic_baseline, Scheme::repetition_baseline}) {
            ScenarioRecipe r = power_base;
            r.scheme = s;
            preset.rows.push_back({r, "levels", stepped(2, 20, 2)});
        }
        return preset;
    }
    if (name == "fig4") {
        preset.description = "mean transmit power and collision rate vs level count";
        ScenarioRecipe r = power_base;
        preset.rows.push_back({r, "levels", stepped(2, 20, 2)});
        return preset;
    }
    if (name == "fig5") {
        preset.description = "frame length and power vs the frame-length budget, L = 20";
        for (Scheme s : {Scheme::pdma, Scheme::nosic_baseline}) {
            ScenarioRecipe r = power_base;
            r.scheme = s;
            preset.rows.push_back({r, "frame_budget", stepped(2, 20, 2)});
        }
        return preset;
    }
    if (name == "fig6") {
        preset.description = "frame length and power vs population, L = 20";
        for (Scheme s : {Scheme::pdma, Scheme::nosic_baseline, Scheme::repetition_baseline}) {
            ScenarioRecipe r = power_base;
            r.scheme = s;
            preset.rows.push_back({r, "population", stepped(10, 100, 10)});
        }
        return preset;
    }
    if (name == "fig7") {
        preset.description = "rate-domain frame length vs level count, T = 10, U = 2";
        for (Scheme s : {Scheme::rdma, Scheme::nosic_baseline}) {
            ScenarioRecipe r = rate_base;
            r.scheme = s;
            preset.rows.push_back({r, "levels", stepped(2, 16, 2)});
        }
        return preset;
    }
    if (name == "fig8") {
        preset.description = "rate-domain frame length vs re-transmission budget, L = 10, U = 2";
        for (Scheme s : {Scheme::rdma, Scheme::nosic_baseline}) {
            ScenarioRecipe r = rate_base;
            r.scheme = s;
            r.levels = 10;
            preset.rows.push_back({r, "budget", {5, 10, 15, 20, 25, 30}});
        }
        return preset;
    }
    if (name == "fig9") {
        preset.description = "spectral efficiency vs mean transmit power, L = 20, budgets 10";
        for (Scheme s : {Scheme::pdma, Scheme::nosic_baseline}) {
            ScenarioRecipe r = power_base;
            r.scheme = s;
            preset.rows.push_back({r, "rate", stepped(1, 8, 1)});
        }
        ScenarioRecipe r = rate_base;
        r.scheme = Scheme::rdma;
        r.levels = 20;
        preset.rows.push_back({r, "mean_rx_power", {0.5, 1, 2, 4, 8, 16, 32, 64}});
        return preset;
    }
    throw std::invalid_argument("unknown preset: " + name);
}

inline ResultTable run_preset(const FigurePreset& preset, const RunOverrides& overrides = {}) {
    ResultTable table;
    if (preset.analytic) {
        table.columns = {"L", "psi_L_U", "psi_1_LU", "ratio"};
        rdma::PsiEvaluator closed_form;
        for (int l = 1; l <= 16; ++l) {
            const double joint = rdma::psi(closed_form, l, 2.0);
            const double orthogonal = rdma::psi(closed_form, 1, 2.0 * l);
            table.rows.push_back({static_cast<std::int64_t>(l), joint, orthogonal,
                                  joint / orthogonal});
        }
        return table;
    }

    table.columns = sweep_columns();
    for (const PresetRow& row : preset.rows) {
        ScenarioRecipe recipe = row.recipe;
        if (overrides.seed) recipe.seed = *overrides.seed;
        if (overrides.trials) recipe.trials = *overrides.trials;
        if (overrides.termination) recipe.termination = *overrides.termination;
        for (const SweepPoint& point : sweep(recipe, row.param, row.values, overrides.workers)) {
            const SummaryStats& st = point.stats;
            table.rows.push_back({point.param, point.value, scheme_name(point.scheme),
                                  st.mean_frame_length, st.stderr_frame_length,
                                  st.mean_tx_power, st.stderr_tx_power, st.collision_rate,
                                  st.overflow_rate, st.silent_rate, st.spectral_efficiency,
                                  st.truncation_rate});
        }
    }
    return table;
}

} // namespace rtxd
