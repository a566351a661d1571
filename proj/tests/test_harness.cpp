#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "circlefit/error.hpp"
#include "circlefit/harness.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace circlefit;

namespace {

// Scoped environment override; restores the prior value on destruction.
class EnvGuard {
  public:
    EnvGuard(const char* name, const char* value) : name_(name) {
        const char* old = std::getenv(name);
        if (old) saved_ = old;
        had_ = old != nullptr;
        if (value)
            ::setenv(name, value, 1);
        else
            ::unsetenv(name);
    }
    ~EnvGuard() {
        if (had_)
            ::setenv(name_.c_str(), saved_.c_str(), 1);
        else
            ::unsetenv(name_.c_str());
    }

  private:
    std::string name_, saved_;
    bool had_ = false;
};

DataSet clean_circle() {
    ArcSpec spec;
    spec.n = 24;
    spec.radius = 2.0;
    spec.center_x = 0.5;
    spec.center_y = -1.0;
    return gen_arc(spec, 17);
}

}  // namespace

TEST_CASE("multistart locates the minimum of a clean circle") {
    DataSet data = clean_circle();
    GlobalMinimum g = find_global_minimum(data, 30, 5);
    REQUIRE_FALSE(g.params.is_line());
    CHECK(g.value <= 1e-16);
    CHECK(g.params.circle().a == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(g.params.circle().b == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(g.params.circle().r == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(g.basin_count >= 1);
    CHECK_THROWS_AS(find_global_minimum(data, 0, 5), Error);
}

TEST_CASE("the cross-plus-origins dataset has several tied minima below the saddle") {
    DataSet data = gen_multi_minima(4);
    std::vector<GlobalMinimum> all = enumerate_minima(data, 200, 99);
    REQUIRE(all.size() >= 2);
    for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].value <= all[i].value);
    // Four symmetric basins share the best value, strictly below the value 2
    // of both the origin-centered circle and every line through the origin.
    CHECK(all[1].value - all[0].value <= 1e-9 * (1.0 + all[0].value));
    CHECK(all[0].value < 2.0);
    CHECK(all[1].value < 2.0);
    for (const GlobalMinimum& g : all) CHECK(g.basin_count == static_cast<int>(all.size()));

    GlobalMinimum best = find_global_minimum(data, 200, 99);
    CHECK(best.value == all.front().value);
}

TEST_CASE("outcomes classify against the known minimum") {
    GlobalMinimum g;
    g.value = 1.0;
    CHECK(classify_outcome(FitStatus::Converged, 1.0, g) == RunOutcome::Success);
    CHECK(classify_outcome(FitStatus::Converged, 1.0 + 1e-10, g) == RunOutcome::Success);
    CHECK(classify_outcome(FitStatus::Converged, 1.5, g) == RunOutcome::LocalMinimum);
    CHECK(classify_outcome(FitStatus::Diverged, 1.0, g) == RunOutcome::Diverged);
    CHECK(classify_outcome(FitStatus::MaxIterations, 1.0, g) == RunOutcome::Stalled);
    CHECK(classify_outcome(FitStatus::Stalled, 7.0, g) == RunOutcome::Stalled);

    CHECK(std::string(outcome_name(RunOutcome::Success)) == "Success");
    CHECK(std::string(outcome_name(RunOutcome::LocalMinimum)) == "LocalMinimum");
    CHECK(std::string(outcome_name(RunOutcome::Diverged)) == "Diverged");
    CHECK(std::string(outcome_name(RunOutcome::Stalled)) == "Stalled");
}

TEST_CASE("wilson interval matches the closed form and clamps at the edges") {
    auto [lo, hi] = wilson_interval(8, 10);
    CHECK(lo == doctest::Approx(0.49016247153664178).epsilon(1e-13));
    CHECK(hi == doctest::Approx(0.94331784854562484).epsilon(1e-13));

    auto [lo0, hi0] = wilson_interval(0, 10);
    CHECK(lo0 == 0.0);
    CHECK(hi0 > 0.0);
    auto [lo1, hi1] = wilson_interval(10, 10);
    CHECK(hi1 == 1.0);
    CHECK(lo1 < 1.0);
    auto [loe, hie] = wilson_interval(0, 0);
    CHECK(loe == 0.0);
    CHECK(hie == 1.0);

    // The interval brackets the point estimate.
    for (int s = 0; s <= 20; ++s) {
        auto [l, h] = wilson_interval(s, 20);
        double p = s / 20.0;
        CHECK(l <= p);
        CHECK(h >= p);
    }
}

TEST_CASE("local-minima census is consistent and deterministic") {
    CensusCounts a = census_local_minima(10, 30, 20, 3);
    CHECK(a.samples == 30);
    CHECK(a.zero + a.one + a.two_plus == a.samples - a.failed);
    CHECK(a.p_zero() + a.p_one() + a.p_two_plus() == doctest::Approx(1.0));
    CHECK(a.mean_iterations > 0.0);
    CHECK(a.mean_flops > 0.0);

    CensusCounts b = census_local_minima(10, 30, 20, 3);
    CHECK(a.zero == b.zero);
    CHECK(a.one == b.one);
    CHECK(a.two_plus == b.two_plus);
    CHECK(a.failed == b.failed);
    CHECK(a.mean_iterations == b.mean_iterations);
    CHECK(a.mean_flops == b.mean_flops);
}

TEST_CASE("config parsing covers every key and rejects the rest") {
    ExperimentConfig def = make_config({});
    CHECK(def.n == 20);
    CHECK(def.samples == 200);
    CHECK(def.starts == 50);
    CHECK(def.sigma == 0.01);
    CHECK(def.seed == 1);
    CHECK(def.arcs.empty());
    CHECK(def.methods.size() == 4);

    ExperimentConfig cfg = make_config({{"n", "12"},
                                        {"samples", "7"},
                                        {"starts", "9"},
                                        {"sigma", "0.25"},
                                        {"seed", "12345678901234567890"},
                                        {"arcs", "45, 90 ,180"},
                                        {"ns", "5,25"},
                                        {"methods", "lma,spath"},
                                        {"max_iterations", "77"},
                                        {"fp_max_iterations", "88"},
                                        {"step_tolerance", "1e-9"},
                                        {"objective_tolerance", "1e-11"},
                                        {"divergence_radius_factor", "100"},
                                        {"initial_damping", "0.01"},
                                        {"damping_up", "5"},
                                        {"damping_down", "0.2"}});
    CHECK(cfg.n == 12);
    CHECK(cfg.samples == 7);
    CHECK(cfg.starts == 9);
    CHECK(cfg.sigma == 0.25);
    CHECK(cfg.seed == 12345678901234567890ull);
    REQUIRE(cfg.arcs.size() == 3);
    CHECK(cfg.arcs[1] == 90.0);
    REQUIRE(cfg.ns.size() == 2);
    CHECK(cfg.ns[1] == 25);
    REQUIRE(cfg.methods.size() == 2);
    CHECK(cfg.methods[0] == IterativeMethod::LMA);
    CHECK(cfg.methods[1] == IterativeMethod::Spath);
    CHECK(cfg.lm_options.max_iterations == 77);
    CHECK(cfg.fp_options.max_iterations == 88);
    CHECK(cfg.lm_options.step_tolerance == 1e-9);
    CHECK(cfg.fp_options.step_tolerance == 1e-9);
    CHECK(cfg.lm_options.objective_tolerance == 1e-11);
    CHECK(cfg.lm_options.divergence_radius_factor == 100.0);
    CHECK(cfg.fp_options.divergence_radius_factor == 100.0);
    CHECK(cfg.lm_options.initial_damping == 0.01);
    CHECK(cfg.lm_options.damping_up == 5.0);
    CHECK(cfg.lm_options.damping_down == 0.2);

    CHECK(make_config({{"arc", "135"}}).arcs == std::vector<double>{135.0});

    CHECK_THROWS_AS(make_config({{"bogus", "1"}}), Error);
    CHECK_THROWS_AS(make_config({{"n", "2"}}), Error);
    CHECK_THROWS_AS(make_config({{"n", "4.5"}}), Error);
    CHECK_THROWS_AS(make_config({{"samples", "abc"}}), Error);
    CHECK_THROWS_AS(make_config({{"sigma", "-0.1"}}), Error);
    CHECK_THROWS_AS(make_config({{"seed", "12x"}}), Error);
    CHECK_THROWS_AS(make_config({{"methods", "lmc,levmar"}}), Error);
    CHECK_THROWS_AS(make_config({{"methods", " , "}}), Error);
    CHECK_THROWS_AS(make_config({{"max_iterations", "0"}}), Error);
}

TEST_CASE("census experiment reports one row per outcome class") {
    ExperimentReport rep = run_experiment(
        "census", {{"ns", "8,12"}, {"samples", "20"}, {"starts", "15"}, {"seed", "4"}});
    CHECK(rep.name == "census");
    REQUIRE(rep.cells.size() == 8);
    const char* labels[4] = {"p0", "p1", "p2plus", "no_convergence"};
    for (int b = 0; b < 2; ++b) {
        double x = b == 0 ? 8.0 : 12.0;
        double sum = 0.0;
        for (int k = 0; k < 4; ++k) {
            const CellStats& c = rep.cells[static_cast<std::size_t>(4 * b + k)];
            CHECK(c.x == x);
            CHECK(c.method == labels[k]);
            CHECK(c.probability >= 0.0);
            CHECK(c.probability <= 1.0);
            CHECK(c.wilson_low <= c.probability);
            CHECK(c.wilson_high >= c.probability);
            if (k < 3) sum += c.probability;
        }
        CHECK(sum == doctest::Approx(1.0));  // no_convergence tracked separately
    }
}

TEST_CASE("convergence experiment compares methods per arc bucket") {
    ExperimentReport rep = run_experiment("convergence", {{"arcs", "90,360"},
                                                          {"n", "10"},
                                                          {"samples", "6"},
                                                          {"starts", "8"},
                                                          {"methods", "lmc,lma"},
                                                          {"seed", "2"}});
    CHECK(rep.name == "convergence");
    REQUIRE(rep.cells.size() == 6);  // (2 methods + audit) x 2 buckets
    for (int b = 0; b < 2; ++b) {
        const CellStats& lmc = rep.cells[static_cast<std::size_t>(3 * b)];
        const CellStats& lma = rep.cells[static_cast<std::size_t>(3 * b + 1)];
        const CellStats& audit = rep.cells[static_cast<std::size_t>(3 * b + 2)];
        CHECK(lmc.method == "lmc");
        CHECK(lma.method == "lma");
        CHECK(audit.method == "included_samples");
        CHECK(audit.runs == 6);
        CHECK(lma.runs == audit.successes * 8);
        CHECK(lma.runs == lmc.runs);
        if (lma.runs > 0) {
            CHECK(lma.probability > 0.5);
            CHECK(lma.mean_iterations > 0.0);
            CHECK(lma.flops_per_point > 0.0);
        }
    }
}

TEST_CASE("escape experiment partitions runs by terminal status") {
    ExperimentReport rep = run_experiment(
        "escape", {{"n", "20"}, {"samples", "5"}, {"starts", "12"}, {"seed", "6"}});
    CHECK(rep.name == "escape");
    REQUIRE(rep.cells.size() == 4);  // default single 180-degree bucket
    double sum = 0.0;
    const char* labels[4] = {"lmc_converged", "lmc_diverged", "lmc_max_iterations",
                             "lmc_stalled"};
    for (int k = 0; k < 4; ++k) {
        CHECK(rep.cells[static_cast<std::size_t>(k)].method == labels[k]);
        CHECK(rep.cells[static_cast<std::size_t>(k)].x == 180.0);
        CHECK(rep.cells[static_cast<std::size_t>(k)].runs == 60);
        sum += rep.cells[static_cast<std::size_t>(k)].probability;
    }
    CHECK(sum == doctest::Approx(1.0));  // statuses are mutually exclusive
}

TEST_CASE("pairing experiment crosses every prefit with every method") {
    ExperimentReport rep = run_experiment("pairing", {{"arcs", "90"},
                                                      {"n", "12"},
                                                      {"samples", "4"},
                                                      {"starts", "6"},
                                                      {"methods", "lmc,lma"},
                                                      {"seed", "8"}});
    CHECK(rep.name == "pairing");
    REQUIRE(rep.cells.size() == 11);  // 5 prefits x 2 methods + audit
    bool saw_af2_lma = false;
    for (const CellStats& c : rep.cells) {
        if (c.method == "af2+lma") {
            saw_af2_lma = true;
            CHECK(c.probability >= 0.0);
            CHECK(c.probability <= 1.0);
        }
    }
    CHECK(saw_af2_lma);
    CHECK(rep.cells.back().method == "included_samples");
}

TEST_CASE("unknown experiments are rejected") {
    CHECK_THROWS_AS(run_experiment("tableau", {}), Error);
}

TEST_CASE("reports serialize to valid json and csv") {
    ExperimentReport rep = run_experiment(
        "census", {{"ns", "8"}, {"samples", "10"}, {"starts", "10"}, {"seed", "4"}});

    nlohmann::json j = nlohmann::json::parse(rep.to_json());
    CHECK(j["experiment"] == "census");
    CHECK(j["config"].is_object());
    CHECK(j["config"]["seed"] == "4");
    CHECK(j["config"].contains("threads"));
    REQUIRE(j["cells"].is_array());
    REQUIRE(j["cells"].size() == rep.cells.size());
    CHECK(j["cells"][0]["method"] == "p0");
    CHECK(j["cells"][0]["x"].is_number());
    CHECK(j["cells"][0]["probability"].is_number());
    CHECK(j["cells"][0]["runs"].is_number_integer());

    std::string csv = rep.to_csv();
    CHECK(csv.rfind("# experiment = census\n", 0) == 0);
    CHECK(csv.find("\nx,method,probability,mean_iterations,flops_per_point\n") !=
          std::string::npos);
    std::size_t rows = 0;
    for (std::size_t pos = csv.find("p0,"); pos != std::string::npos;
         pos = csv.find("p0,", pos + 1))
        ++rows;
    CHECK(rows == 1);
}

TEST_CASE("experiments are bit-reproducible and thread-count invariant") {
    std::map<std::string, std::string> overrides = {{"arcs", "120"},     {"n", "10"},
                                                    {"samples", "5"},    {"starts", "6"},
                                                    {"methods", "lma"},  {"seed", "13"}};
    EnvGuard threads("CIRCLEFIT_THREADS", "3");
    std::string a = run_experiment("convergence", overrides).to_json();
    std::string b = run_experiment("convergence", overrides).to_json();
    CHECK(a == b);
    {
        EnvGuard one("CIRCLEFIT_THREADS", "1");
        std::string c = run_experiment("convergence", overrides).to_json();
        // The echoed thread count differs; the science must not.
        auto strip = [](std::string s) {
            std::size_t pos = s.find("\"threads\"");
            std::size_t end = s.find('\n', pos);
            s.erase(pos, end - pos);
            return s;
        };
        CHECK(strip(a) == strip(c));
    }
}

TEST_CASE("thread count reads and validates the environment") {
    {
        EnvGuard g("CIRCLEFIT_THREADS", "2");
        CHECK(thread_count() == 2);
    }
    {
        EnvGuard g("CIRCLEFIT_THREADS", "abc");
        CHECK_THROWS_AS(thread_count(), Error);
    }
    {
        EnvGuard g("CIRCLEFIT_THREADS", "0");
        CHECK_THROWS_AS(thread_count(), Error);
    }
    {
        EnvGuard g("CIRCLEFIT_THREADS", nullptr);
        CHECK(thread_count() >= 1);
    }
}

TEST_CASE("parallel loop touches every index once and propagates errors") {
    EnvGuard g("CIRCLEFIT_THREADS", "4");
    std::vector<int> hits(1000, 0);
    parallel_for(1000, [&](int i) { hits[static_cast<std::size_t>(i)] += 1; });
    for (int h : hits) CHECK(h == 1);

    parallel_for(0, [&](int) { throw std::runtime_error("unreachable"); });

    CHECK_THROWS_AS(parallel_for(500,
                                 [&](int i) {
                                     if (i == 137) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
}
