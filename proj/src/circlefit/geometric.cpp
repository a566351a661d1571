#include "circlefit/geometric.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "circlefit/linalg.hpp"
#include "circlefit/rng.hpp"

namespace circlefit {

namespace {

constexpr double kDampingCap = 1e12;
constexpr double kDampingFloor = 1e-14;
constexpr double kAcceptSlack = 1e-15;  // F may grow by round-off at a minimum
constexpr double kMinESquared = 1e-14;  // below this 1+4AD counts as singular
constexpr double kNearESquared = 1e-4;  // close enough for a frame shift to help
constexpr int kMaxOriginShifts = 10;

double wrap_angle(double t) {
    double w = std::remainder(t, 2.0 * std::numbers::pi);
    if (w <= -std::numbers::pi) w = std::numbers::pi;
    return w;
}

void require_fittable(const DataSet& data) {
    if (data.size() < 3) fail(ErrorCode::Degenerate, "fitting needs at least 3 points");
    if (!(data.d_max() > 0.0)) fail(ErrorCode::Degenerate, "all points coincide");
}

void require_circle(const NaturalCircle& c) {
    if (!(c.r > 0.0) || !std::isfinite(c.a) || !std::isfinite(c.b) || !std::isfinite(c.r))
        fail(ErrorCode::Argument, "initial circle must be finite with positive radius");
}

}  // namespace

const char* status_name(FitStatus s) {
    switch (s) {
        case FitStatus::Converged: return "Converged";
        case FitStatus::Diverged: return "Diverged";
        case FitStatus::MaxIterations: return "MaxIterations";
        case FitStatus::Stalled: return "Stalled";
    }
    return "?";
}

const char* method_name(IterativeMethod m) {
    switch (m) {
        case IterativeMethod::LMC: return "lmc";
        case IterativeMethod::LMA: return "lma";
        case IterativeMethod::Landau: return "landau";
        case IterativeMethod::Spath: return "spath";
    }
    return "?";
}

FitOptions default_options(IterativeMethod m) {
    FitOptions opts;
    if (m == IterativeMethod::Landau || m == IterativeMethod::Spath) opts.max_iterations = 5000;
    return opts;
}

AdtParams to_adt(const GeneralizedCircle& c) {
    AlgebraicCircle a = to_algebraic(c);
    double theta = (a.B == 0.0 && a.C == 0.0) ? 0.0 : std::atan2(a.C, a.B);
    return {a.A, a.D, wrap_angle(theta)};
}

GeneralizedCircle from_adt(const AdtParams& p) {
    double e2 = 1.0 + 4.0 * p.A * p.D;
    double E = std::sqrt(std::max(e2, 0.0));
    return to_natural({p.A, E * std::cos(p.theta), E * std::sin(p.theta), p.D});
}

double adt_distance(const AdtParams& p, const Point& pt) {
    double e2 = 1.0 + 4.0 * p.A * p.D;
    if (e2 < 0.0) {
        if (e2 < -1e-12) fail(ErrorCode::Argument, "singular configuration: 1+4AD < 0");
        e2 = 0.0;
    }
    double E = std::sqrt(e2);
    double u = pt.x * std::cos(p.theta) + pt.y * std::sin(p.theta);
    double P = p.A * pt.z() + E * u + p.D;
    double s = 1.0 + 4.0 * p.A * P;
    if (s < 0.0) {
        if (s < -1e-12) fail(ErrorCode::Argument, "singular point: 1+4AP < 0");
        s = 0.0;
    }
    return 2.0 * P / (1.0 + std::sqrt(s));
}

AdtDerivatives lma_distance_and_jacobian(const AdtParams& p, const Point& pt) {
    double e2 = 1.0 + 4.0 * p.A * p.D;
    if (e2 <= 0.0) fail(ErrorCode::Argument, "singular configuration: 1+4AD <= 0");
    double E = std::sqrt(e2);
    double ct = std::cos(p.theta), st = std::sin(p.theta);
    double z = pt.z();
    double u = pt.x * ct + pt.y * st;
    double P = p.A * z + E * u + p.D;
    double q2 = 1.0 + 4.0 * p.A * P;
    if (q2 <= 0.0) fail(ErrorCode::Argument, "singular point: 1+4AP <= 0");
    double Q = std::sqrt(q2);

    AdtDerivatives out;
    out.d = 2.0 * P / (1.0 + Q);
    double R = 2.0 * (1.0 - p.A * out.d / Q) / (Q + 1.0);
    out.dA = (z + 2.0 * p.D * u / E) * R - out.d * out.d / Q;
    out.dD = (2.0 * p.A * u / E + 1.0) * R;
    out.dTheta = (-pt.x * st + pt.y * ct) * E * R;
    return out;
}

NaturalCircle circle_from_line(const Line& l, const DataSet& data) {
    double r = 100.0 * data.d_max();
    double off = l.B * data.centroid_x() + l.C * data.centroid_y() + l.D;
    double fx = data.centroid_x() - off * l.B;
    double fy = data.centroid_y() - off * l.C;
    return {fx + r * l.B, fy + r * l.C, r};
}

namespace {

// Shared Levenberg-Marquardt driver. The Model supplies residuals, the
// Jacobian, step application, parameter-step scaling, the divergence test
// and frame bookkeeping for the two parametrizations.
struct Mat3Sys {
    std::array<std::array<double, 3>, 3> jtj{};
    std::array<double, 3> jtr{};
};

template <typename Model>
FitOutcome run_lm(Model& model, const FitOptions& opts, double per_iter_flops) {
    FitOutcome out;
    out.status = FitStatus::MaxIterations;
    double f = model.objective_current();
    out.trace.push_back({model.current_curve(), f});
    double lambda = opts.initial_damping;

    // One iteration = one damped solve plus the evaluation of the proposed
    // step, whether that step is then taken or not. A rejected trial costs a
    // solve and an objective evaluation, so it is counted and charged like
    // any other iteration; the trace repeats the unchanged iterate for it.
    Mat3Sys sys;
    bool rebuild = true;
    bool done = false;
    while (!done && out.iterations < opts.max_iterations) {
        if (model.needs_reparametrization()) {
            if (!model.reparametrize()) {
                out.status = FitStatus::Stalled;
                break;
            }
            f = model.objective_current();
            rebuild = true;
            continue;
        }
        if (rebuild) {
            sys = Mat3Sys{};
            if (!model.build_normal_equations(sys)) {
                out.status = FitStatus::Stalled;
                break;
            }
            rebuild = false;
        }

        ++out.iterations;
        std::array<std::array<double, 3>, 3> damped = sys.jtj;
        for (int k = 0; k < 3; ++k) damped[k][k] += lambda * sys.jtj[k][k];
        std::array<double, 3> rhs = {-sys.jtr[0], -sys.jtr[1], -sys.jtr[2]};
        std::array<double, 3> delta{};
        bool solved = solve_linear<3>(damped, rhs, delta, 0.0);
        bool finite = solved && std::isfinite(delta[0]) && std::isfinite(delta[1]) &&
                      std::isfinite(delta[2]);

        if (finite && model.step_crosses_singularity(delta)) {
            // A long trial step can leave the feasible parameter region from
            // anywhere; only when the iterate itself sits near the singular
            // set does moving the frame help. Otherwise shorten the step
            // like any failed trial.
            out.trace.push_back({model.current_curve(), f});
            if (model.near_singularity()) {
                if (!model.reparametrize()) {
                    out.status = FitStatus::Stalled;
                    break;
                }
                f = model.objective_current();
                rebuild = true;
                continue;
            }
            lambda *= opts.damping_up;
            if (lambda > kDampingCap) {
                out.status = FitStatus::Stalled;
                break;
            }
            continue;
        }

        double f_trial = finite ? model.objective_at_step(delta) : f;
        bool admissible = finite && std::isfinite(f_trial) && model.step_admissible(delta);
        bool improving = admissible && f_trial <= f + kAcceptSlack * (1.0 + f);

        // Stopping rule, tested on the proposed step: once trial steps fall
        // below the step tolerance without changing F, the iterate is a
        // minimum to working precision whether or not this trial is taken.
        if (admissible && model.scaled_step(delta) < opts.step_tolerance &&
            std::abs(f_trial - f) <= opts.objective_tolerance * (1.0 + f)) {
            if (improving) {
                model.apply_step(delta);
                f = f_trial;
            }
            out.status = FitStatus::Converged;
            out.trace.push_back({model.current_curve(), f});
            break;
        }

        if (!improving) {
            out.trace.push_back({model.current_curve(), f});
            lambda *= opts.damping_up;
            if (lambda > kDampingCap) {
                out.status = FitStatus::Stalled;
                break;
            }
            continue;
        }

        lambda = std::max(lambda * opts.damping_down, kDampingFloor);
        model.apply_step(delta);
        f = f_trial;
        rebuild = true;
        out.trace.push_back({model.current_curve(), f});
        if (model.diverged(opts.divergence_radius_factor)) {
            out.status = FitStatus::Diverged;
            done = true;
        }
    }
    out.result = model.current_curve();
    out.objective = f;
    out.flops = out.iterations * per_iter_flops;
    return out;
}

// Natural-parameter model: residuals d_i = r_i - R over centered data.
class LmcModel {
  public:
    LmcModel(const DataSet& data, const NaturalCircle& init)
        : pts_(centered_points(data)),
          d_max_(data.d_max()),
          cx_(data.centroid_x()),
          cy_(data.centroid_y()),
          a_(init.a - data.centroid_x()),
          b_(init.b - data.centroid_y()),
          r_(init.r) {}

    double objective_current() const { return objective_at({a_, b_, r_}); }

    double objective_at_step(const std::array<double, 3>& d) const {
        return objective_at({a_ + d[0], b_ + d[1], r_ + d[2]});
    }

    bool step_admissible(const std::array<double, 3>& d) const { return r_ + d[2] > 0.0; }

    bool step_crosses_singularity(const std::array<double, 3>&) const { return false; }
    bool near_singularity() const { return false; }
    bool needs_reparametrization() const { return false; }
    bool reparametrize() { return false; }

    bool build_normal_equations(Mat3Sys& sys) const {
        for (const Point& p : pts_) {
            double dx = p.x - a_, dy = p.y - b_;
            double r = std::hypot(dx, dy);
            double ja, jb;
            if (r > 0.0) {
                ja = -dx / r;
                jb = -dy / r;
            } else {
                ja = 0.0;
                jb = 0.0;
            }
            double res = r - r_;
            double row[3] = {ja, jb, -1.0};
            for (int i = 0; i < 3; ++i) {
                for (int j = i; j < 3; ++j) sys.jtj[i][j] += row[i] * row[j];
                sys.jtr[i] += row[i] * res;
            }
        }
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < i; ++j) sys.jtj[i][j] = sys.jtj[j][i];
        return true;
    }

    void apply_step(const std::array<double, 3>& d) {
        a_ += d[0];
        b_ += d[1];
        r_ += d[2];
    }

    double scaled_step(const std::array<double, 3>& d) const {
        return std::max({std::abs(d[0]), std::abs(d[1]), std::abs(d[2])}) / d_max_;
    }

    bool diverged(double factor) const { return std::hypot(a_, b_) > factor * d_max_; }

    GeneralizedCircle current_curve() const {
        return GeneralizedCircle(NaturalCircle{a_ + cx_, b_ + cy_, r_});
    }

  private:
    double objective_at(const std::array<double, 3>& p) const {
        double f = 0.0;
        for (const Point& pt : pts_) {
            double d = std::hypot(pt.x - p[0], pt.y - p[1]) - p[2];
            f += d * d;
        }
        return f;
    }

    std::vector<Point> pts_;
    double d_max_, cx_, cy_;
    double a_, b_, r_;
};

// (A, D, theta) model over centered data with the origin-shift remedy for
// the 1+4AD = 0 singularity.
class LmaModel {
  public:
    LmaModel(const DataSet& data, const GeneralizedCircle& init, const FitOptions& opts)
        : pts_(centered_points(data)),
          d_max_(data.d_max()),
          tx_(data.centroid_x()),
          ty_(data.centroid_y()),
          shift_rng_(Rng::stream(opts.rng_seed, 0x4f73u, 0)),
          shift_mag_(data.d_max() / std::sqrt(static_cast<double>(data.size()))) {
        AlgebraicCircle a = to_algebraic(init);
        cur_ = adt_of(translate_frame(a, -tx_, -ty_));
    }

    double objective_current() const { return objective_adt(cur_); }

    double objective_at_step(const std::array<double, 3>& d) const {
        return objective_adt(stepped(d));
    }

    bool step_admissible(const std::array<double, 3>&) const { return true; }

    bool step_crosses_singularity(const std::array<double, 3>& d) const {
        AdtParams t = stepped(d);
        return 1.0 + 4.0 * t.A * t.D < kMinESquared;
    }

    bool near_singularity() const { return 1.0 + 4.0 * cur_.A * cur_.D < kNearESquared; }

    bool needs_reparametrization() const { return 1.0 + 4.0 * cur_.A * cur_.D < kMinESquared; }

    // Move the origin by a random vector of magnitude d_max/sqrt(n) and
    // rewrite the current parameters in the new frame; the curve is unchanged.
    bool reparametrize() {
        for (int attempt = 0; attempt < kMaxOriginShifts - shifts_; ++attempt) {
            double ang = 2.0 * std::numbers::pi * shift_rng_.next_unit();
            double vx = shift_mag_ * std::cos(ang);
            double vy = shift_mag_ * std::sin(ang);
            AlgebraicCircle a = algebraic_of(cur_);
            AdtParams moved = adt_of(translate_frame(a, -vx, -vy));
            ++shifts_;
            if (1.0 + 4.0 * moved.A * moved.D >= kMinESquared) {
                for (Point& p : pts_) {
                    p.x -= vx;
                    p.y -= vy;
                }
                tx_ += vx;
                ty_ += vy;
                cur_ = moved;
                return true;
            }
        }
        return false;  // shift budget exhausted
    }

    bool build_normal_equations(Mat3Sys& sys) const {
        for (const Point& p : pts_) {
            AdtDerivatives g;
            try {
                g = lma_distance_and_jacobian(cur_, p);
            } catch (const Error&) {
                return false;  // data point at the circle center
            }
            double row[3] = {g.dA, g.dD, g.dTheta};
            for (int i = 0; i < 3; ++i) {
                for (int j = i; j < 3; ++j) sys.jtj[i][j] += row[i] * row[j];
                sys.jtr[i] += row[i] * g.d;
            }
        }
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < i; ++j) sys.jtj[i][j] = sys.jtj[j][i];
        return true;
    }

    void apply_step(const std::array<double, 3>& d) { cur_ = stepped(d); }

    double scaled_step(const std::array<double, 3>& d) const {
        return std::max({std::abs(d[0]), std::abs(d[1]), std::abs(d[2])});
    }

    bool diverged(double) const { return false; }  // bounded parametrization

    GeneralizedCircle current_curve() const {
        return to_natural(translate_frame(algebraic_of(cur_), tx_, ty_));
    }

  private:
    static AdtParams adt_of(const AlgebraicCircle& raw) {
        AlgebraicCircle a = normalize(raw);
        double theta = (a.B == 0.0 && a.C == 0.0) ? 0.0 : std::atan2(a.C, a.B);
        return {a.A, a.D, wrap_angle(theta)};
    }

    static AlgebraicCircle algebraic_of(const AdtParams& p) {
        double E = std::sqrt(std::max(1.0 + 4.0 * p.A * p.D, 0.0));
        return {p.A, E * std::cos(p.theta), E * std::sin(p.theta), p.D};
    }

    AdtParams stepped(const std::array<double, 3>& d) const {
        return {cur_.A + d[0], cur_.D + d[1], wrap_angle(cur_.theta + d[2])};
    }

    double objective_adt(const AdtParams& p) const {
        double e2 = 1.0 + 4.0 * p.A * p.D;
        if (e2 < 0.0) return std::numeric_limits<double>::quiet_NaN();
        double E = std::sqrt(e2);
        double ct = std::cos(p.theta), st = std::sin(p.theta);
        double f = 0.0;
        for (const Point& pt : pts_) {
            double P = p.A * pt.z() + E * (pt.x * ct + pt.y * st) + p.D;
            double s = std::max(1.0 + 4.0 * p.A * P, 0.0);
            double d = 2.0 * P / (1.0 + std::sqrt(s));
            f += d * d;
        }
        return f;
    }

    std::vector<Point> pts_;
    double d_max_, tx_, ty_;
    Rng shift_rng_;
    double shift_mag_;
    AdtParams cur_;
    int shifts_ = 0;
};

}  // namespace

FitOutcome fit_lmc(const DataSet& data, const NaturalCircle& init, const FitOptions& opts) {
    require_fittable(data);
    require_circle(init);
    LmcModel model(data, init);
    return run_lm(model, opts, 12.0 * static_cast<double>(data.size()) + 41.0);
}

FitOutcome fit_lma(const DataSet& data, const GeneralizedCircle& init, const FitOptions& opts) {
    require_fittable(data);
    if (!init.is_line()) require_circle(init.circle());
    LmaModel model(data, init, opts);
    return run_lm(model, opts, 39.0 * static_cast<double>(data.size()) + 40.0);
}

namespace {

// Fixed-point bookkeeping common to Landau and Spath.
struct FixedPointState {
    std::vector<Point> pts;
    double d_max, cx, cy;
    double a, b, r;

    FixedPointState(const DataSet& data, const NaturalCircle& init)
        : pts(centered_points(data)),
          d_max(data.d_max()),
          cx(data.centroid_x()),
          cy(data.centroid_y()),
          a(init.a - data.centroid_x()),
          b(init.b - data.centroid_y()),
          r(init.r) {}

    double objective() const {
        double f = 0.0;
        for (const Point& p : pts) {
            double d = std::hypot(p.x - a, p.y - b) - r;
            f += d * d;
        }
        return f;
    }

    GeneralizedCircle curve() const {
        return GeneralizedCircle(NaturalCircle{a + cx, b + cy, r});
    }

    // A data point exactly at the center leaves the update undefined; nudge
    // the center and carry on.
    bool fix_center_collision() {
        for (int tries = 0; tries < 8; ++tries) {
            bool hit = false;
            for (const Point& p : pts) {
                if (p.x == a && p.y == b) {
                    hit = true;
                    break;
                }
            }
            if (!hit) return true;
            a += 1e-9 * d_max;
        }
        return false;
    }
};

template <typename Update>
FitOutcome run_fixed_point(const DataSet& data, const NaturalCircle& init, const FitOptions& opts,
                           double per_iter_flops, Update update) {
    require_fittable(data);
    require_circle(init);
    FixedPointState st(data, init);
    FitOutcome out;
    double f = st.objective();
    out.trace.push_back({st.curve(), f});
    bool terminated = false;

    while (out.iterations < opts.max_iterations) {
        if (!st.fix_center_collision()) {
            out.status = FitStatus::Stalled;
            terminated = true;
            break;
        }
        double na, nb, nr;
        if (!update(st, na, nb, nr) || !std::isfinite(na) || !std::isfinite(nb) ||
            !std::isfinite(nr) || nr <= 0.0) {
            out.status = FitStatus::Stalled;
            terminated = true;
            break;
        }
        double da = na - st.a, db = nb - st.b, dr = nr - st.r;
        st.a = na;
        st.b = nb;
        st.r = nr;
        double f_new = st.objective();
        ++out.iterations;
        out.trace.push_back({st.curve(), f_new});
        if (!std::isfinite(f_new)) {
            out.status = FitStatus::Stalled;
            terminated = true;
            break;
        }
        if (std::hypot(st.a, st.b) > opts.divergence_radius_factor * st.d_max) {
            f = f_new;
            out.status = FitStatus::Diverged;
            terminated = true;
            break;
        }
        double step = std::max({std::abs(da), std::abs(db), std::abs(dr)}) / st.d_max;
        bool small_change = std::abs(f - f_new) <= opts.objective_tolerance * (1.0 + f);
        f = f_new;
        if (step < opts.step_tolerance && small_change) {
            out.status = FitStatus::Converged;
            terminated = true;
            break;
        }
    }
    if (!terminated) out.status = FitStatus::MaxIterations;
    out.result = st.curve();
    out.objective = f;
    out.flops = out.iterations * per_iter_flops;
    return out;
}

}  // namespace

FitOutcome fit_landau(const DataSet& data, const NaturalCircle& init, const FitOptions& opts) {
    double n = static_cast<double>(data.size());
    return run_fixed_point(
        data, init, opts, 11.0 * n + 5.0,
        [](const FixedPointState& st, double& na, double& nb, double& nr) {
            double sr = 0.0, sa = 0.0, sb = 0.0;
            for (const Point& p : st.pts) {
                double r = std::hypot(p.x - st.a, p.y - st.b);
                if (r == 0.0) return false;
                sr += r;
                sa += (st.a - p.x) / r;
                sb += (st.b - p.y) / r;
            }
            double n = static_cast<double>(st.pts.size());
            nr = sr / n;             // new radius first,
            na = nr * sa / n;        // then the center updates use it
            nb = nr * sb / n;
            return true;
        });
}

FitOutcome fit_spath(const DataSet& data, const NaturalCircle& init, const FitOptions& opts) {
    double n = static_cast<double>(data.size());
    return run_fixed_point(
        data, init, opts, 11.0 * n + 13.0,
        [](const FixedPointState& st, double& na, double& nb, double& nr) {
            double sc = 0.0, ss = 0.0, sm = 0.0;
            for (const Point& p : st.pts) {
                double dx = p.x - st.a, dy = p.y - st.b;
                double r = std::hypot(dx, dy);
                if (r == 0.0) return false;
                double c = dx / r, s = dy / r;
                sc += c;
                ss += s;
                sm += c * p.x + s * p.y;
            }
            double n = static_cast<double>(st.pts.size());
            double cbar = sc / n, sbar = ss / n;
            double denom = 1.0 - cbar * cbar - sbar * sbar;
            if (denom <= 1e-15) return false;
            nr = (sm / n) / denom;  // exact minimizer for the fixed foot angles
            na = -nr * cbar;
            nb = -nr * sbar;
            return true;
        });
}

FitOutcome run_iterative(IterativeMethod m, const DataSet& data, const GeneralizedCircle& init,
                         const FitOptions& opts) {
    if (m == IterativeMethod::LMA) return fit_lma(data, init, opts);
    NaturalCircle c = init.is_line() ? circle_from_line(init.line(), data) : init.circle();
    switch (m) {
        case IterativeMethod::LMC: return fit_lmc(data, c, opts);
        case IterativeMethod::Landau: return fit_landau(data, c, opts);
        case IterativeMethod::Spath: return fit_spath(data, c, opts);
        default: break;
    }
    fail(ErrorCode::Internal, "unknown iterative method");
}

}  // namespace circlefit
