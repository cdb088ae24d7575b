#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rtxd/harness.hpp"
#include "rtxd/presets.hpp"
#include "support.hpp"

using namespace rtxd;

namespace {

ScenarioRecipe small_pdma_recipe() {
    ScenarioRecipe r;
    r.scheme = Scheme::pdma;
    r.design = DesignKind::power;
    r.population = 20;
    r.access_prob = 0.2;
    r.levels = 8;
    r.rate = 2.0;
    r.frame_budget = 5.0;
    r.trials = 20'000;
    r.seed = 91;
    return r;
}

} // namespace

TEST_CASE("no activity produces an empty frame record") {
    ScenarioRecipe r = small_pdma_recipe();
    r.access_prob = 0.0;
    r.trials = 10;
    const Scenario s = build_scenario(r);
    for (std::int64_t i = 0; i < 10; ++i) {
        const FrameRecord rec = run_trial(s, i);
        CHECK(rec.frame_length == 0);
        CHECK(rec.active_users == 0);
        CHECK(rec.transmitting_users == 0);
    }
}

TEST_CASE("trials are deterministic in (scenario, index)") {
    const Scenario s = build_scenario(small_pdma_recipe());
    for (std::int64_t i : {0, 1, 17, 9999}) {
        const FrameRecord a = run_trial(s, i);
        const FrameRecord b = run_trial(s, i);
        REQUIRE(a == b);
    }
}

TEST_CASE("two distinct-level users never exceed the frame bound") {
    ScenarioRecipe r;
    r.scheme = Scheme::pdma;
    r.rate = 4.0;
    r.frame_budget = 10.0;
    r.levels = 20;
    r.seed = 92;
    const Scenario s = build_scenario(r);
    int seen = 0;
    for (std::int64_t i = 0; i < 5000 && seen < 100; ++i) {
        const FrameRecord rec = run_trial(s, i);
        if (rec.transmitting_users == 2 && !rec.collision) {
            ++seen;
            REQUIRE(rec.frame_length <= 10);
        }
    }
    CHECK(seen == 100);
}

TEST_CASE("one trial aggregates to itself") {
    ScenarioRecipe r = small_pdma_recipe();
    r.trials = 1;
    const Scenario s = build_scenario(r);
    const FrameRecord rec = run_trial(s, 0);
    const SummaryStats stats = run_scenario(s);
    REQUIRE(stats.trials == 1);
    if (rec.transmitting_users > 0) {
        CHECK(stats.mean_frame_length == static_cast<double>(rec.frame_length));
        CHECK(stats.stderr_frame_length == 0.0);
        CHECK(stats.mean_tx_power ==
              Catch::Approx(rec.sum_power / rec.transmitting_users));
    }
}

TEST_CASE("doubling the trial count keeps the first half identical") {
    ScenarioRecipe r = small_pdma_recipe();
    r.trials = 64;
    const Scenario s64 = build_scenario(r);
    r.trials = 128;
    const Scenario s128 = build_scenario(r);
    for (std::int64_t i = 0; i < 64; ++i) REQUIRE(run_trial(s64, i) == run_trial(s128, i));
}

TEST_CASE("worker count never changes the result") {
    ScenarioRecipe r = small_pdma_recipe();
    r.trials = 4000;
    const Scenario s = build_scenario(r);
    const SummaryStats one = run_scenario(s, 1);
    const SummaryStats three = run_scenario(s, 3);
    const SummaryStats eight = run_scenario(s, 8);
    REQUIRE(one == three);
    REQUIRE(one == eight);
}

TEST_CASE("aggregation is the merge of per-trial records") {
    ScenarioRecipe r = small_pdma_recipe();
    r.trials = 500;
    const Scenario s = build_scenario(r);
    std::vector<FrameRecord> records;
    for (std::int64_t i = 0; i < s.trials; ++i) records.push_back(run_trial(s, i));
    const SummaryStats direct = aggregate(records, s.include_empty_frames);
    REQUIRE(direct == run_scenario(s));

    testsupport::Accumulator frames;
    for (const auto& rec : records)
        if (rec.transmitting_users > 0) frames.add(static_cast<double>(rec.frame_length));
    CHECK(direct.mean_frame_length == Catch::Approx(frames.mean()).epsilon(1e-12));
    CHECK(direct.stderr_frame_length == Catch::Approx(frames.std_error()).epsilon(1e-9));
}

TEST_CASE("monte carlo rates match the closed forms") {
    const Scenario s = build_scenario(small_pdma_recipe());
    std::vector<FrameRecord> records;
    for (std::int64_t i = 0; i < s.trials; ++i) records.push_back(run_trial(s, i));
    const SummaryStats stats = aggregate(records, false);

    // overflow vs binomial tail
    const double p_overflow = pdma::overflow_prob(20, 0.2, 8);
    const double sigma_overflow =
        std::sqrt(p_overflow * (1.0 - p_overflow) / static_cast<double>(s.trials));
    CHECK(std::fabs(stats.overflow_rate - p_overflow) <= 3.0 * sigma_overflow);

    // per-frame collision indicator vs the birthday probability of the
    // realized transmitting count; their difference has zero mean
    testsupport::Accumulator diff;
    for (const auto& rec : records)
        diff.add((rec.collision ? 1.0 : 0.0) -
                 pdma::collision_prob_exact(rec.transmitting_users, 8));
    CHECK(std::fabs(diff.mean()) <= 3.0 * diff.std_error());

    // silent users vs the configured drop probability
    std::int64_t active = 0;
    for (const auto& rec : records) active += rec.active_users;
    const double sigma_silent = std::sqrt(0.1 * 0.9 / static_cast<double>(active));
    CHECK(std::fabs(stats.silent_rate - 0.1) <= 3.0 * sigma_silent);
}

TEST_CASE("empty frames enter the mean only on request") {
    ScenarioRecipe r = small_pdma_recipe();
    r.access_prob = 0.05;  // plenty of empty frames
    r.trials = 3000;
    const Scenario s = build_scenario(r);
    std::vector<FrameRecord> records;
    for (std::int64_t i = 0; i < s.trials; ++i) records.push_back(run_trial(s, i));
    const SummaryStats skip = aggregate(records, false);
    const SummaryStats keep = aggregate(records, true);
    CHECK(keep.frames_counted == s.trials);
    CHECK(skip.frames_counted < keep.frames_counted);
    CHECK(skip.mean_frame_length > keep.mean_frame_length);
}

TEST_CASE("sweep applies the parameter and keeps the scheme") {
    ScenarioRecipe r = small_pdma_recipe();
    r.trials = 300;
    const auto points = sweep(r, "levels", {4, 8, 12});
    REQUIRE(points.size() == 3);
    for (const auto& p : points) {
        CHECK(p.param == "levels");
        CHECK(p.scheme == Scheme::pdma);
    }
    CHECK(points[0].value == 4.0);
    CHECK(points[2].value == 12.0);

    ScenarioRecipe bad = r;
    CHECK_THROWS_AS(set_parameter(bad, "bogus", 1.0), std::invalid_argument);
}

TEST_CASE("scenario validation rejects mismatched pairings") {
    ScenarioRecipe r = small_pdma_recipe();
    Scenario s = build_scenario(r);
    s.scheme = Scheme::rdma;  // rdma on a power design
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);

    Scenario t = build_scenario(r);
    t.fading.mode = FadingSpec::Mode::iid_per_slot;
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);

    Scenario u = build_scenario(r);
    u.trials = 0;
    CHECK_THROWS_AS(u.validate(), std::invalid_argument);
}

TEST_CASE("figure presets carry the reported parameters") {
    const FigurePreset fig3 = figure_preset("fig3");
    REQUIRE(fig3.rows.size() == 3);
    CHECK(fig3.rows[0].recipe.scheme == Scheme::pdma);
    CHECK(fig3.rows[1].recipe.scheme == Scheme::nosic_baseline);
    CHECK(fig3.rows[2].recipe.scheme == Scheme::repetition_baseline);
    for (const auto& row : fig3.rows) {
        CHECK(row.param == "levels");
        CHECK(row.values == std::vector<double>{2, 4, 6, 8, 10, 12, 14, 16, 18, 20});
        CHECK(row.recipe.population == 50);
        CHECK(row.recipe.access_prob == 0.1);
        CHECK(row.recipe.mean_gain == 1.0);
        CHECK(row.recipe.rate == 4.0);
        CHECK(row.recipe.frame_budget == 10.0);
        CHECK(row.recipe.drop_prob == 0.1);
    }

    const FigurePreset fig8 = figure_preset("fig8");
    REQUIRE(fig8.rows.size() == 2);
    for (const auto& row : fig8.rows) {
        CHECK(row.param == "budget");
        CHECK(row.values == std::vector<double>{5, 10, 15, 20, 25, 30});
        CHECK(row.recipe.mean_rx_power == 2.0);
        CHECK(row.recipe.levels == 10);
        CHECK(row.recipe.population == 50);
        CHECK(row.recipe.access_prob == 0.1);
    }

    CHECK_THROWS_AS(figure_preset("fig99"), std::invalid_argument);
}

TEST_CASE("a longer frame budget buys a lower transmit power") {
    ScenarioRecipe r;  // L = 20 power design at defaults
    r.trials = 5000;
    r.seed = 95;
    const auto points = sweep(r, "frame_budget", {4, 8, 12, 16, 20});
    for (std::size_t i = 1; i < points.size(); ++i)
        REQUIRE(points[i].stats.mean_tx_power < points[i - 1].stats.mean_tx_power);
}

TEST_CASE("rate-domain sweeps carry the reported parameters") {
    const FigurePreset fig7 = figure_preset("fig7");
    REQUIRE(fig7.rows.size() == 2);
    CHECK(fig7.rows[0].recipe.scheme == Scheme::rdma);
    CHECK(fig7.rows[1].recipe.scheme == Scheme::nosic_baseline);
    for (const auto& row : fig7.rows) {
        CHECK(row.param == "levels");
        CHECK(row.recipe.mean_rx_power == 2.0);
        CHECK(row.recipe.budget == 10);
    }

    const FigurePreset fig9 = figure_preset("fig9");
    REQUIRE(fig9.rows.size() == 3);
    CHECK(fig9.rows[0].param == "rate");
    CHECK(fig9.rows[2].param == "mean_rx_power");
    CHECK(fig9.rows[2].recipe.levels == 20);
}

TEST_CASE("fig2 is an analytic psi table") {
    const ResultTable table = run_preset(figure_preset("fig2"));
    REQUIRE(table.columns == std::vector<std::string>{"L", "psi_L_U", "psi_1_LU", "ratio"});
    REQUIRE(table.rows.size() == 16);
    rdma::PsiEvaluator closed;
    for (std::size_t i = 0; i < 16; ++i) {
        const int l = static_cast<int>(i) + 1;
        REQUIRE(std::get<std::int64_t>(table.rows[i][0]) == l);
        CHECK(std::get<double>(table.rows[i][1]) ==
              Catch::Approx(rdma::psi(closed, l, 2.0)).epsilon(1e-14));
        CHECK(std::get<double>(table.rows[i][2]) ==
              Catch::Approx(rdma::psi(closed, 1, 2.0 * l)).epsilon(1e-14));
        CHECK(std::get<double>(table.rows[i][3]) >= 1.0);
    }
}

TEST_CASE("preset tables are byte-identical across reruns and worker counts") {
    const FigurePreset preset = figure_preset("fig4");
    RunOverrides a;
    a.trials = 400;
    a.seed = 7;
    a.workers = 1;
    RunOverrides b = a;
    b.workers = 4;
    const std::string csv_a = render_csv(run_preset(preset, a));
    const std::string csv_b = render_csv(run_preset(preset, b));
    REQUIRE(csv_a == csv_b);
    CHECK(csv_a.starts_with("param,value,scheme,mean_frame_len,"));
}

TEST_CASE("rate-domain trial: single level orthogonal reference matches rdma") {
    ScenarioRecipe r;
    r.scheme = Scheme::rdma;
    r.design = DesignKind::rate;
    r.population = 1;
    r.access_prob = 1.0;
    r.levels = 1;
    r.budget = 10;
    r.mean_rx_power = 2.0;
    r.trials = 200;
    r.seed = 93;
    const Scenario rdma_scenario = build_scenario(r);
    r.scheme = Scheme::oma_reference;
    const Scenario oma_scenario = build_scenario(r);
    for (std::int64_t i = 0; i < 200; ++i)
        REQUIRE(run_trial(rdma_scenario, i).frame_length ==
                run_trial(oma_scenario, i).frame_length);
}

TEST_CASE("rate-domain records count rate collisions") {
    ScenarioRecipe r;
    r.scheme = Scheme::rdma;
    r.design = DesignKind::rate;
    r.population = 6;
    r.access_prob = 1.0;
    r.levels = 3;
    r.budget = 5;
    r.mean_rx_power = 2.0;
    r.trials = 50;
    r.seed = 94;
    const Scenario s = build_scenario(r);
    for (std::int64_t i = 0; i < 50; ++i) {
        const FrameRecord rec = run_trial(s, i);
        CHECK(rec.overflow);           // 6 users on 3 levels
        CHECK(rec.collision);          // pigeonhole
        CHECK(rec.silent_users == 0);  // no silencing in the rate domain
        CHECK(rec.transmitting_users == 6);
    }
}
