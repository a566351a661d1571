#pragma once

#include <cstdint>
#include <vector>

#include "circlefit/geometry.hpp"

namespace circlefit {

// Circle/line coefficients with the angle substitution B = E cos(theta),
// C = E sin(theta), E = sqrt(1+4AD). Bounded parametrization: lines (A = 0)
// are interior points, so minimization cannot escape to infinity.
struct AdtParams {
    double A = 0.0;
    double D = 0.0;
    double theta = 0.0;  // wrapped to (-pi, pi]
};

AdtParams to_adt(const GeneralizedCircle& c);
GeneralizedCircle from_adt(const AdtParams& p);

// Distance alone tolerates E = 0; requires 1+4AD >= 0 (tiny negatives clamped).
double adt_distance(const AdtParams& p, const Point& pt);

struct AdtDerivatives {
    double d;       // signed distance
    double dA;      // partial derivatives of d
    double dD;
    double dTheta;
};

// Strict form used by the minimizer: requires 1+4AD > 0 and 1+4AP > 0.
AdtDerivatives lma_distance_and_jacobian(const AdtParams& p, const Point& pt);

enum class FitStatus { Converged, Diverged, MaxIterations, Stalled };
const char* status_name(FitStatus s);

enum class IterativeMethod { LMC, LMA, Landau, Spath };
const char* method_name(IterativeMethod m);

struct FitOptions {
    int max_iterations = 200;
    double step_tolerance = 1e-10;       // on the scaled parameter step
    double objective_tolerance = 1e-12;  // on the relative F change
    double divergence_radius_factor = 1e6;  // times d_max, on |center - centroid|
    double initial_damping = 1e-3;
    double damping_up = 10.0;
    double damping_down = 0.1;
    std::uint64_t rng_seed = 1;  // drives the origin-shift direction only
};

FitOptions default_options(IterativeMethod m);

struct TraceEntry {
    GeneralizedCircle params;
    double objective;
};

struct FitOutcome {
    GeneralizedCircle result;
    double objective = 0.0;
    FitStatus status = FitStatus::Converged;
    int iterations = 0;  // accepted steps; trace holds iterations+1 entries
    std::vector<TraceEntry> trace;
    double flops = 0.0;  // analytic per-iteration cost model
};

FitOutcome fit_lmc(const DataSet& data, const NaturalCircle& init, const FitOptions& opts);
FitOutcome fit_lma(const DataSet& data, const GeneralizedCircle& init, const FitOptions& opts);
FitOutcome fit_landau(const DataSet& data, const NaturalCircle& init, const FitOptions& opts);
FitOutcome fit_spath(const DataSet& data, const NaturalCircle& init, const FitOptions& opts);

// Circle hugging the line near the data; lets circle-only fitters start
// from a line-shaped initial guess.
NaturalCircle circle_from_line(const Line& l, const DataSet& data);

FitOutcome run_iterative(IterativeMethod m, const DataSet& data, const GeneralizedCircle& init,
                         const FitOptions& opts);

}  // namespace circlefit
