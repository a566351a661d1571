#include "circlefit/algebraic.hpp"

#include <cmath>
#include <limits>

namespace circlefit {

MomentMatrix moments(const std::vector<Point>& pts) {
    MomentMatrix m;
    for (const Point& p : pts) {
        double z = p.z();
        m.Mzz += z * z;
        m.Mxz += p.x * z;
        m.Myz += p.y * z;
        m.Mz += z;
        m.Mxx += p.x * p.x;
        m.Mxy += p.x * p.y;
        m.Mx += p.x;
        m.Myy += p.y * p.y;
        m.My += p.y;
    }
    m.n = static_cast<double>(pts.size());
    return m;
}

MomentMatrix moments(const DataSet& data) {
    return moments(data.points());
}

Mat4 constraint_matrix(Constraint kind, const MomentMatrix& m) {
    if (kind == Constraint::Pratt) {
        return {{{0, 0, 0, -2}, {0, 1, 0, 0}, {0, 0, 1, 0}, {-2, 0, 0, 0}}};
    }
    return {{{4 * m.Mz, 2 * m.Mx, 2 * m.My, 0},
             {2 * m.Mx, m.n, 0, 0},
             {2 * m.My, 0, m.n, 0},
             {0, 0, 0, 0}}};
}

namespace {

// det(M): the constant term of both characteristic polynomials.
double det_moments(const MomentMatrix& m) {
    return -m.Mx * m.Mx * m.Myy * m.Mzz + m.Mx * m.Mx * m.Myz * m.Myz +
           2 * m.Mx * m.Mxy * m.My * m.Mzz - 2 * m.Mx * m.Mxy * m.Myz * m.Mz -
           2 * m.Mx * m.Mxz * m.My * m.Myz + 2 * m.Mx * m.Mxz * m.Myy * m.Mz -
           m.Mxx * m.My * m.My * m.Mzz + 2 * m.Mxx * m.My * m.Myz * m.Mz -
           m.Mxx * m.Myy * m.Mz * m.Mz + m.Mxx * m.Myy * m.Mzz * m.n -
           m.Mxx * m.Myz * m.Myz * m.n + m.Mxy * m.Mxy * m.Mz * m.Mz -
           m.Mxy * m.Mxy * m.Mzz * m.n - 2 * m.Mxy * m.Mxz * m.My * m.Mz +
           2 * m.Mxy * m.Mxz * m.Myz * m.n + m.Mxz * m.Mxz * m.My * m.My -
           m.Mxz * m.Mxz * m.Myy * m.n;
}

// The linear coefficient of the Pratt quartic; the Taubin cubic's linear
// coefficient is n times this.
double linear_coefficient(const MomentMatrix& m) {
    return m.Mx * m.Mx * m.Mzz - 4 * m.Mx * m.Mxy * m.Myz + 4 * m.Mx * m.Mxz * m.Myy -
           2 * m.Mx * m.Mxz * m.Mz + 4 * m.Mxx * m.My * m.Myz - 4 * m.Mxx * m.Myy * m.Mz +
           m.Mxx * m.Mz * m.Mz - m.Mxx * m.Mzz * m.n + 4 * m.Mxy * m.Mxy * m.Mz -
           4 * m.Mxy * m.Mxz * m.My + m.Mxz * m.Mxz * m.n + m.My * m.My * m.Mzz -
           2 * m.My * m.Myz * m.Mz + m.Myy * m.Mz * m.Mz - m.Myy * m.Mzz * m.n +
           m.Myz * m.Myz * m.n;
}

}  // namespace

Poly build_pratt_poly(const MomentMatrix& m) {
    Poly q;
    q.degree = 4;
    q.c[0] = -4.0;
    q.c[1] = 4.0 * (m.Mxx + m.Myy - m.Mz);
    q.c[2] = -4 * m.Mx * m.Mxz - 4 * m.Mxx * m.Myy + 4 * m.Mxx * m.Mz + 4 * m.Mxy * m.Mxy -
             4 * m.My * m.Myz + 4 * m.Myy * m.Mz - m.Mz * m.Mz + m.Mzz * m.n;
    q.c[3] = linear_coefficient(m);
    q.c[4] = det_moments(m);
    return q;
}

Poly build_taubin_poly(const MomentMatrix& m) {
    Poly q;
    q.degree = 3;
    q.c[0] = -4.0 * m.n * m.n * (m.Mz * m.n - m.Mx * m.Mx - m.My * m.My);
    q.c[1] = m.n * (-4 * m.Mx * m.Mx * m.Myy + 8 * m.Mx * m.Mxy * m.My - 4 * m.Mx * m.Mxz * m.n -
                    4 * m.Mxx * m.My * m.My + 4 * m.Mxx * m.Mz * m.n - 4 * m.My * m.Myz * m.n +
                    4 * m.Myy * m.Mz * m.n - m.Mz * m.Mz * m.n + m.Mzz * m.n * m.n);
    q.c[2] = m.n * linear_coefficient(m);
    q.c[3] = det_moments(m);
    q.c[4] = 0.0;
    return q;
}

RootResult newton_smallest_root(const Poly& q) {
    double scale = q.coefficient_scale();
    double q0 = q.eval(0.0);
    if (q0 < -1e-12 * scale)
        fail(ErrorCode::Argument, "characteristic polynomial negative at zero");
    if (q0 <= 1e-14 * scale) return {0.0, 0};  // exact-fit case, eta = 0 is the root

    double x = 0.0, qx = q0;
    double hi = std::numeric_limits<double>::infinity();
    const int cap = 200;  // 50 Newton steps would do; bisection headroom on top
    for (int steps = 1; steps <= cap; ++steps) {
        double dq = q.eval_derivative(x);
        double cand;
        if (dq < 0.0) {
            cand = x - qx / dq;
            if (cand >= hi || !(cand > x)) cand = 0.5 * (x + hi);
        } else {
            cand = std::isfinite(hi) ? 0.5 * (x + hi) : 2.0 * x + 1.0;
        }
        if (!std::isfinite(cand)) break;
        double qc = q.eval(cand);
        if (qc >= 0.0) {
            if (qc == 0.0 || cand - x <= 1e-12 * (1.0 + cand)) return {cand, steps};
            x = cand;
            qx = qc;
        } else {
            hi = cand;
            if (hi - x <= 1e-12 * (1.0 + hi)) return {0.5 * (x + hi), steps};
        }
    }
    fail(ErrorCode::NonConverged, "root finder exhausted its safeguard cap");
}

namespace {

void normalize_direction(Vec4& v) {
    double norm = std::sqrt(dot(v, v));
    std::size_t imax = 0;
    for (std::size_t i = 1; i < 4; ++i)
        if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
    double s = (v[imax] < 0.0 ? -1.0 : 1.0) / norm;
    for (double& c : v) c *= s;
}

}  // namespace

AlgebraicCircle recover_parameters(const MomentMatrix& m, Constraint kind, double eta) {
    Mat4 M = m.as_matrix();
    Mat4 N = constraint_matrix(kind, m);
    Mat4 K;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) K[i][j] = M[i][j] - eta * N[i][j];

    double m_scale = frobenius(M);
    double shift = 1e-12 * (m.Mzz + m.Mxx + m.Myy + m.n);
    Mat4 Ks = K;
    for (std::size_t i = 0; i < 4; ++i) Ks[i][i] += shift;

    // Fixed start vector; orthogonal to the null space only on a measure-zero
    // set, and the adjugate fallback covers that. Iterate past the first
    // acceptable residual: each sweep shrinks the off-null contamination by
    // about shift/gap, and a nearly-line solution needs |A| pushed all the
    // way to the roundoff floor to classify correctly.
    Vec4 v = {0.5477, -0.3651, 0.6325, 0.4082};
    Vec4 best_v = v;
    double best_res = std::numeric_limits<double>::infinity();
    for (int sweep = 0; sweep < 6; ++sweep) {
        Vec4 w;
        if (!solve_linear<4>(Ks, v, w, 1e-300)) break;
        bool finite = true;
        for (double c : w) finite = finite && std::isfinite(c);
        if (!finite) break;
        normalize_direction(w);
        v = w;
        Vec4 res = mat_vec(K, v);
        double rn = std::sqrt(dot(res, res));
        if (rn < best_res) {
            best_res = rn;
            best_v = v;
        }
        if (rn <= 5e-15 * m_scale) break;
    }
    v = best_v;
    bool ok = best_res <= 1e-8 * m_scale;
    if (!ok) {
        Mat4 adj = adjugate(K);
        std::size_t best = 0;
        double best_norm = -1.0;
        for (std::size_t j = 0; j < 4; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < 4; ++i) s += adj[i][j] * adj[i][j];
            if (s > best_norm) {
                best_norm = s;
                best = j;
            }
        }
        for (std::size_t i = 0; i < 4; ++i) v[i] = adj[i][best];
        if (best_norm > 0.0) normalize_direction(v);
        Vec4 res = mat_vec(K, v);
        ok = best_norm > 0.0 && std::sqrt(dot(res, res)) <= 1e-8 * m_scale;
        if (!ok) fail(ErrorCode::Singular, "null direction of M - eta*N is not isolable");
    }

    try {
        return canonical_algebraic({v[0], v[1], v[2], v[3]});
    } catch (const Error&) {
        fail(ErrorCode::Singular, "recovered direction violates the constraint normalization");
    }
}

const char* method_name(PrefitMethod m) {
    switch (m) {
        case PrefitMethod::AF1: return "af1";
        case PrefitMethod::AF2: return "af2";
        case PrefitMethod::AF3: return "af3";
        case PrefitMethod::TRI: return "tri";
        case PrefitMethod::CEN: return "cen";
    }
    return "?";
}

namespace {

void require_fittable(const DataSet& data) {
    if (data.size() < 3) fail(ErrorCode::Degenerate, "fitting needs at least 3 points");
    if (!(data.d_max() > 0.0)) fail(ErrorCode::Degenerate, "all points coincide");
}

PrefitResult algebraic_pipeline(const DataSet& data, Constraint kind) {
    require_fittable(data);
    double s = data.d_max();
    std::vector<Point> pts = centered_points(data);
    for (Point& p : pts) {
        p.x /= s;
        p.y /= s;
    }
    MomentMatrix m = moments(pts);
    Poly q = (kind == Constraint::Pratt) ? build_pratt_poly(m) : build_taubin_poly(m);
    RootResult root = newton_smallest_root(q);
    AlgebraicCircle unit = recover_parameters(m, kind, root.eta);

    // Classify circle vs line in the centered, unit-scale frame where the
    // coefficients are O(1); mapping (A,B,C,D) back first would inflate B,C
    // for distant centers and defeat the scale-free test. The natural
    // parameters then transform exactly under p = s*u + c.
    GeneralizedCircle local = to_natural(unit);
    PrefitResult out;
    if (local.is_line()) {
        const Line& l = local.line();
        out.estimate = GeneralizedCircle(
            Line{l.B, l.C, s * l.D - l.B * data.centroid_x() - l.C * data.centroid_y()});
    } else {
        const NaturalCircle& c = local.circle();
        out.estimate = GeneralizedCircle(
            NaturalCircle{s * c.a + data.centroid_x(), s * c.b + data.centroid_y(), s * c.r});
    }
    out.method = (kind == Constraint::Pratt) ? PrefitMethod::AF2 : PrefitMethod::AF3;
    out.newton_steps = root.steps;
    double n = static_cast<double>(data.size());
    out.flops = (kind == Constraint::Pratt) ? 16 * n + 16 * root.steps + 80
                                            : 16 * n + 14 * root.steps + 40;
    return out;
}

NaturalCircle circumcircle(const Point& p1, const Point& p2, const Point& p3) {
    double gx = (p1.x + p2.x + p3.x) / 3.0;
    double gy = (p1.y + p2.y + p3.y) / 3.0;
    Point q1{p1.x - gx, p1.y - gy}, q2{p2.x - gx, p2.y - gy}, q3{p3.x - gx, p3.y - gy};
    double d = 2.0 * (q1.x * (q2.y - q3.y) + q2.x * (q3.y - q1.y) + q3.x * (q1.y - q2.y));
    double z1 = q1.z(), z2 = q2.z(), z3 = q3.z();
    double ux = (z1 * (q2.y - q3.y) + z2 * (q3.y - q1.y) + z3 * (q1.y - q2.y)) / d;
    double uy = (z1 * (q3.x - q2.x) + z2 * (q1.x - q3.x) + z3 * (q2.x - q1.x)) / d;
    return {gx + ux, gy + uy, std::hypot(q1.x - ux, q1.y - uy)};
}

double doubled_area(const Point& p1, const Point& p2, const Point& p3) {
    return std::abs((p2.x - p1.x) * (p3.y - p1.y) - (p2.y - p1.y) * (p3.x - p1.x));
}

}  // namespace

PrefitResult fit_af1(const DataSet& data) {
    require_fittable(data);
    MomentMatrix m = moments(centered_points(data));
    // Centered data decouple the 3x3 normal system: D separates out.
    double det = m.Mxx * m.Myy - m.Mxy * m.Mxy;
    double tr = m.Mxx + m.Myy;
    if (det <= 1e-12 * tr * tr)
        fail(ErrorCode::Singular, "normal system is singular (collinear data)");
    double B = (-m.Mxz * m.Myy + m.Myz * m.Mxy) / det;
    double C = (-m.Myz * m.Mxx + m.Mxz * m.Mxy) / det;
    double D = -m.Mz / m.n;
    double r2 = (B * B + C * C) / 4.0 - D;
    if (!(r2 > 0.0)) fail(ErrorCode::Singular, "normal system yields no real circle");

    PrefitResult out;
    out.estimate = GeneralizedCircle(NaturalCircle{-B / 2.0 + data.centroid_x(),
                                                   -C / 2.0 + data.centroid_y(), std::sqrt(r2)});
    out.method = PrefitMethod::AF1;
    out.flops = 13.0 * m.n + 31.0;
    return out;
}

PrefitResult fit_af2(const DataSet& data) {
    return algebraic_pipeline(data, Constraint::Pratt);
}

PrefitResult fit_af3(const DataSet& data) {
    return algebraic_pipeline(data, Constraint::Taubin);
}

PrefitResult prefit_tri(const DataSet& data) {
    require_fittable(data);
    const std::vector<Point>& p = data.points();
    std::size_t n = p.size();
    std::size_t bi = 0, bj = 1, bk = 2;
    double best = -1.0;
    if (n <= 50) {
        for (std::size_t i = 0; i + 2 < n; ++i)
            for (std::size_t j = i + 1; j + 1 < n; ++j)
                for (std::size_t k = j + 1; k < n; ++k) {
                    double a2 = doubled_area(p[i], p[j], p[k]);
                    if (a2 > best) {
                        best = a2;
                        bi = i;
                        bj = j;
                        bk = k;
                    }
                }
    } else {
        // Farthest pair, then the point farthest from their line.
        double d2best = -1.0;
        for (std::size_t i = 0; i + 1 < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                double dx = p[i].x - p[j].x, dy = p[i].y - p[j].y;
                double d2 = dx * dx + dy * dy;
                if (d2 > d2best) {
                    d2best = d2;
                    bi = i;
                    bj = j;
                }
            }
        best = -1.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == bi || k == bj) continue;
            double a2 = doubled_area(p[bi], p[bj], p[k]);
            if (a2 > best) {
                best = a2;
                bk = k;
            }
        }
    }
    if (best / 2.0 < 1e-12 * data.d_max() * data.d_max())
        fail(ErrorCode::Degenerate, "largest triangle is degenerate (collinear data)");

    PrefitResult out;
    out.estimate = GeneralizedCircle(circumcircle(p[bi], p[bj], p[bk]));
    out.method = PrefitMethod::TRI;
    double nn = static_cast<double>(n);
    out.flops = (n <= 50) ? nn * nn * nn : 4.0 * nn * nn + 6.0 * nn;
    return out;
}

PrefitResult prefit_cen(const DataSet& data) {
    if (!(data.d_max() > 0.0)) fail(ErrorCode::Degenerate, "all points coincide");
    PrefitResult out;
    out.estimate = GeneralizedCircle(
        NaturalCircle{data.centroid_x(), data.centroid_y(),
                      optimal_radius(data, data.centroid_x(), data.centroid_y())});
    out.method = PrefitMethod::CEN;
    out.flops = 6.0 * static_cast<double>(data.size());
    return out;
}

PrefitResult run_prefit(PrefitMethod m, const DataSet& data) {
    switch (m) {
        case PrefitMethod::AF1: return fit_af1(data);
        case PrefitMethod::AF2: return fit_af2(data);
        case PrefitMethod::AF3: return fit_af3(data);
        case PrefitMethod::TRI: return prefit_tri(data);
        case PrefitMethod::CEN: return prefit_cen(data);
    }
    fail(ErrorCode::Internal, "unknown prefit method");
}

}  // namespace circlefit
