#pragma once

#include <vector>

#include "circlefit/geometry.hpp"
#include "circlefit/linalg.hpp"

namespace circlefit {

// The ten distinct entries of the symmetric 4x4 matrix of power sums over
// the data, ordered (z, x, y, 1) so that A^T M A is the plain algebraic
// objective sum (A z_i + B x_i + C y_i + D)^2.
struct MomentMatrix {
    double Mzz = 0, Mxz = 0, Myz = 0, Mz = 0;
    double Mxx = 0, Mxy = 0, Mx = 0;
    double Myy = 0, My = 0;
    double n = 0;

    Mat4 as_matrix() const {
        return {{{Mzz, Mxz, Myz, Mz}, {Mxz, Mxx, Mxy, Mx}, {Myz, Mxy, Myy, My}, {Mz, Mx, My, n}}};
    }
};

MomentMatrix moments(const std::vector<Point>& pts);
MomentMatrix moments(const DataSet& data);

enum class Constraint { Pratt, Taubin };

Mat4 constraint_matrix(Constraint kind, const MomentMatrix& m);

// Characteristic polynomial det(M - eta*N) in closed form: quartic for the
// Pratt constraint, cubic for Taubin (its matrix has a zero row).
Poly build_pratt_poly(const MomentMatrix& m);
Poly build_taubin_poly(const MomentMatrix& m);

struct RootResult {
    double eta;
    int steps;
};

// Smallest nonnegative root, Newton from 0 with a bisection safeguard.
// The iterate sequence is nondecreasing; steps counts every update.
RootResult newton_smallest_root(const Poly& q);

// Null-space direction of (M - eta*N), normalized to B^2+C^2-4AD = 1 with
// the canonical sign. Inverse iteration with a tiny diagonal shift; falls
// back to the largest adjugate column.
AlgebraicCircle recover_parameters(const MomentMatrix& m, Constraint kind, double eta);

enum class PrefitMethod { AF1, AF2, AF3, TRI, CEN };

const char* method_name(PrefitMethod m);

struct PrefitResult {
    GeneralizedCircle estimate;
    PrefitMethod method = PrefitMethod::AF1;
    int newton_steps = 0;  // 0 for AF1/TRI/CEN
    double flops = 0.0;    // analytic cost model, not instrumentation
};

PrefitResult fit_af1(const DataSet& data);
PrefitResult fit_af2(const DataSet& data);
PrefitResult fit_af3(const DataSet& data);
PrefitResult prefit_tri(const DataSet& data);
PrefitResult prefit_cen(const DataSet& data);
PrefitResult run_prefit(PrefitMethod m, const DataSet& data);

}  // namespace circlefit
