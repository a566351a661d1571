#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "algebraic.hpp"
#include "generate.hpp"
#include "geometric.hpp"
#include "geometry.hpp"

namespace circlefit {

// ---------------------------------------------------------------------------
// Global-minimum search and local-minima census.

struct GlobalMinimum {
    GeneralizedCircle params;
    double value = 0.0;
    // Number of distinct converged minima found by the multistart search.
    int basin_count = 0;
};

// Multistart gradient search: n_starts random guesses, converged results
// clustered by canonical coefficients. Throws NonConverged if no start
// converges.
GlobalMinimum find_global_minimum(const DataSet& data, int n_starts, uint64_t seed);

// Every distinct converged minimum from the same search, sorted by ascending
// objective value; each entry carries the total cluster count in basin_count.
// find_global_minimum returns the first entry.
std::vector<GlobalMinimum> enumerate_minima(const DataSet& data, int n_starts, uint64_t seed);

struct CensusCounts {
    int samples = 0;
    int zero = 0;      // exactly one minimum found (no local minima)
    int one = 0;       // one extra local minimum
    int two_plus = 0;  // two or more extra local minima
    int failed = 0;    // no start converged; excluded from the distribution
    double mean_iterations = 0.0;  // per run, over every run
    double mean_flops = 0.0;

    double p_zero() const;
    double p_one() const;
    double p_two_plus() const;
};

// Distribution of the local-minima count over random uniform-square samples
// of size n.
CensusCounts census_local_minima(int n, int n_samples, int n_starts, uint64_t seed);

// ---------------------------------------------------------------------------
// Outcome classification against a known global minimum.

enum class RunOutcome { Success, LocalMinimum, Diverged, Stalled };

const char* outcome_name(RunOutcome o);

RunOutcome classify_outcome(FitStatus status, double objective, const GlobalMinimum& g);
RunOutcome classify_outcome(const FitOutcome& out, const GlobalMinimum& g);

// ---------------------------------------------------------------------------
// Experiment configuration and reports.

struct ExperimentConfig {
    int n = 20;
    int samples = 200;
    int starts = 50;
    double sigma = 0.01;
    uint64_t seed = 1;
    std::vector<double> arcs;           // arc buckets in degrees; empty = uniform squares
    std::vector<int> ns;                // sample sizes for the census experiment
    std::vector<IterativeMethod> methods = {IterativeMethod::LMC, IterativeMethod::LMA,
                                            IterativeMethod::Landau, IterativeMethod::Spath};
    FitOptions lm_options = default_options(IterativeMethod::LMC);
    FitOptions fp_options = default_options(IterativeMethod::Landau);

    const FitOptions& options_for(IterativeMethod m) const;
};

// Parses key=value overrides (n, samples, starts, sigma, seed, arc/arcs, ns,
// methods, max_iterations, fp_max_iterations, step_tolerance,
// objective_tolerance, divergence_radius_factor, initial_damping, damping_up,
// damping_down). Unknown keys are rejected.
ExperimentConfig make_config(const std::map<std::string, std::string>& overrides);

struct CellStats {
    double x = 0.0;       // arc degrees or sample size, depending on experiment
    std::string method;   // fitter, fitter pair, or census row label
    int runs = 0;
    int successes = 0;
    double probability = 0.0;
    double mean_iterations = 0.0;
    double flops_per_point = 0.0;
    double wilson_low = 0.0;
    double wilson_high = 0.0;
};

struct ExperimentReport {
    std::string name;
    std::vector<std::pair<std::string, std::string>> config;  // echo of the effective settings
    std::vector<CellStats> cells;

    std::string to_json() const;
    std::string to_csv() const;
};

// 95% Wilson score interval for s successes out of r runs.
std::pair<double, double> wilson_interval(int successes, int runs);

// Experiments. Names accepted by run_experiment: "census", "convergence",
// "cost", "escape", "pairing".
ExperimentReport run_census_experiment(const ExperimentConfig& cfg);
ExperimentReport run_convergence_experiment(const ExperimentConfig& cfg);
ExperimentReport run_cost_experiment(const ExperimentConfig& cfg);
ExperimentReport run_escape_experiment(const ExperimentConfig& cfg);
ExperimentReport run_pairing_experiment(const ExperimentConfig& cfg);

ExperimentReport run_experiment(const std::string& name,
                                const std::map<std::string, std::string>& overrides);

// ---------------------------------------------------------------------------
// Deterministic parallel loop. Worker threads pull indexes dynamically;
// callers must write results into per-index slots so the output does not
// depend on scheduling. Thread count comes from CIRCLEFIT_THREADS when set,
// otherwise the hardware count.
int thread_count();
void parallel_for(int count, const std::function<void(int)>& body);

}  // namespace circlefit
