#include "circlefit/geometry.hpp"

#include <cmath>

namespace circlefit {

namespace {

double kahan_mean(const std::vector<Point>& pts, double Point::* coord) {
    double sum = 0.0, comp = 0.0;
    for (const Point& p : pts) {
        double y = p.*coord - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum / static_cast<double>(pts.size());
}

}  // namespace

DataSet::DataSet(std::vector<Point> points) : points_(std::move(points)) {
    if (points_.empty()) fail(ErrorCode::Argument, "dataset must contain at least one point");
    for (const Point& p : points_) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            fail(ErrorCode::Argument, "dataset contains a non-finite coordinate");
    }
    cx_ = kahan_mean(points_, &Point::x);
    cy_ = kahan_mean(points_, &Point::y);
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
        for (std::size_t j = i + 1; j < points_.size(); ++j) {
            double dx = points_[i].x - points_[j].x;
            double dy = points_[i].y - points_[j].y;
            d_max_ = std::max(d_max_, std::hypot(dx, dy));
        }
    }
}

double signed_distance(const NaturalCircle& c, const Point& p) {
    return std::hypot(p.x - c.a, p.y - c.b) - c.r;
}

double signed_distance(const Line& l, const Point& p) {
    return l.B * p.x + l.C * p.y + l.D;
}

double signed_distance(const AlgebraicCircle& c, const Point& p) {
    double P = c.A * p.z() + c.B * p.x + c.C * p.y + c.D;
    double s = 1.0 + 4.0 * c.A * P;
    if (s < 0.0) {
        if (s < -1e-12) fail(ErrorCode::Argument, "singular point: 1+4AP < 0");
        s = 0.0;  // round-off below an exact zero
    }
    return 2.0 * P / (1.0 + std::sqrt(s));
}

double signed_distance(const GeneralizedCircle& c, const Point& p) {
    return c.is_line() ? signed_distance(c.line(), p) : signed_distance(c.circle(), p);
}

double objective(const NaturalCircle& c, const DataSet& data) {
    double f = 0.0;
    for (const Point& p : data.points()) {
        double d = signed_distance(c, p);
        f += d * d;
    }
    return f;
}

double objective(const GeneralizedCircle& c, const DataSet& data) {
    double f = 0.0;
    for (const Point& p : data.points()) {
        double d = signed_distance(c, p);
        f += d * d;
    }
    return f;
}

double optimal_radius(const DataSet& data, double a, double b) {
    double sum = 0.0;
    for (const Point& p : data.points()) sum += std::hypot(p.x - a, p.y - b);
    return sum / static_cast<double>(data.size());
}

double reduced_objective(const DataSet& data, double a, double b) {
    double rbar = optimal_radius(data, a, b);
    double f = 0.0;
    for (const Point& p : data.points()) {
        double d = std::hypot(p.x - a, p.y - b) - rbar;
        f += d * d;
    }
    return f;
}

std::vector<double> contour_grid(const DataSet& data, const Window& w, int nx, int ny) {
    if (nx < 2 || ny < 2) fail(ErrorCode::Argument, "contour grid needs at least 2x2 nodes");
    std::vector<double> values(static_cast<std::size_t>(nx) * ny);
    for (int i = 0; i < ny; ++i) {
        double b = w.y0 + (w.y1 - w.y0) * i / (ny - 1);
        for (int j = 0; j < nx; ++j) {
            double a = w.x0 + (w.x1 - w.x0) * j / (nx - 1);
            values[static_cast<std::size_t>(i) * nx + j] = reduced_objective(data, a, b);
        }
    }
    return values;
}

AlgebraicCircle normalize(const AlgebraicCircle& c) {
    double disc = c.discriminant();
    if (disc <= 0.0) fail(ErrorCode::Degenerate, "degenerate circle: B^2+C^2-4AD <= 0");
    double s = 1.0 / std::sqrt(disc);
    return {c.A * s, c.B * s, c.C * s, c.D * s};
}

GeneralizedCircle to_natural(const AlgebraicCircle& raw) {
    AlgebraicCircle c = normalize(raw);
    if (represents_line(c.A, c.B, c.C)) {
        double s = 1.0 / std::hypot(c.B, c.C);
        return GeneralizedCircle(Line{c.B * s, c.C * s, c.D * s});
    }
    return GeneralizedCircle(
        NaturalCircle{-c.B / (2.0 * c.A), -c.C / (2.0 * c.A), 1.0 / (2.0 * std::abs(c.A))});
}

AlgebraicCircle to_algebraic(const NaturalCircle& c, int sign) {
    if (!(c.r > 0.0)) fail(ErrorCode::Argument, "circle radius must be positive");
    double A = (sign >= 0 ? 1.0 : -1.0) / (2.0 * c.r);
    double B = -2.0 * A * c.a;
    double C = -2.0 * A * c.b;
    double D = (B * B + C * C - 1.0) / (4.0 * A);
    return {A, B, C, D};
}

AlgebraicCircle to_algebraic(const GeneralizedCircle& c) {
    if (c.is_line()) {
        const Line& l = c.line();
        double s = 1.0 / std::hypot(l.B, l.C);
        return {0.0, l.B * s, l.C * s, l.D * s};
    }
    return to_algebraic(c.circle(), +1);
}

AlgebraicCircle translate_frame(const AlgebraicCircle& c, double tx, double ty) {
    return {c.A,
            c.B - 2.0 * c.A * tx,
            c.C - 2.0 * c.A * ty,
            c.D - c.B * tx - c.C * ty + c.A * (tx * tx + ty * ty)};
}

AlgebraicCircle scale_frame(const AlgebraicCircle& c, double s) {
    return {c.A / s, c.B, c.C, c.D * s};
}

AlgebraicCircle canonical_algebraic(const AlgebraicCircle& c) {
    AlgebraicCircle a = normalize(c);
    bool flip;
    if (represents_line(a.A, a.B, a.C)) {
        flip = a.D > 0.0 || (a.D == 0.0 && (a.B < 0.0 || (a.B == 0.0 && a.C < 0.0)));
    } else {
        flip = a.A < 0.0;
    }
    if (flip) return {-a.A, -a.B, -a.C, -a.D};
    return a;
}

std::array<double, 4> canonical_coefficients(const GeneralizedCircle& c) {
    AlgebraicCircle a = canonical_algebraic(to_algebraic(c));
    return {a.A, a.B, a.C, a.D};
}

std::vector<Point> centered_points(const DataSet& data) {
    std::vector<Point> pts;
    pts.reserve(data.size());
    for (const Point& p : data.points())
        pts.push_back({p.x - data.centroid_x(), p.y - data.centroid_y()});
    return pts;
}

ParameterBox parameter_box(const DataSet& data) {
    if (!(data.d_max() > 0.0)) fail(ErrorCode::Degenerate, "all points coincide");
    double n = static_cast<double>(data.size());
    double A_max = n / (2.0 * data.d_max());
    double B_max = 2.0 * n;  // = 2 * A_max * (2 * d_max), centers within 2*d_max of origin
    double C_max = B_max;
    double D_max = (B_max * B_max + C_max * C_max + 1.0) * data.d_max() / 2.0;
    return {A_max, B_max, C_max, D_max};
}

}  // namespace circlefit
