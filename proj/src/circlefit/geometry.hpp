#pragma once

#include <array>
#include <cstddef>
#include <variant>
#include <vector>

#include "circlefit/error.hpp"

namespace circlefit {

struct Point {
    double x = 0.0;
    double y = 0.0;
    double z() const { return x * x + y * y; }
};

// Immutable point list with eagerly cached centroid and maximal pairwise
// distance. Construction accepts any n >= 1; fitting operations require
// n >= 3 and d_max > 0 and check for themselves.
class DataSet {
  public:
    explicit DataSet(std::vector<Point> points);

    const std::vector<Point>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    double centroid_x() const { return cx_; }
    double centroid_y() const { return cy_; }
    double d_max() const { return d_max_; }

  private:
    std::vector<Point> points_;
    double cx_ = 0.0;
    double cy_ = 0.0;
    double d_max_ = 0.0;
};

struct NaturalCircle {
    double a = 0.0;  // center x
    double b = 0.0;  // center y
    double r = 1.0;  // radius, > 0
};

// Coefficients of A(x^2+y^2) + Bx + Cy + D = 0. Normalized form keeps
// B^2 + C^2 - 4AD = 1; the locus is a circle when A != 0, a line when A = 0.
struct AlgebraicCircle {
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    double D = 0.0;
    double discriminant() const { return B * B + C * C - 4.0 * A * D; }
};

// B x + C y + D = 0 with (B, C) a unit normal.
struct Line {
    double B = 1.0;
    double C = 0.0;
    double D = 0.0;
};

class GeneralizedCircle {
  public:
    GeneralizedCircle() : v_(NaturalCircle{}) {}
    explicit GeneralizedCircle(const NaturalCircle& c) : v_(c) {}
    explicit GeneralizedCircle(const Line& l) : v_(l) {}

    bool is_line() const { return std::holds_alternative<Line>(v_); }
    const NaturalCircle& circle() const { return std::get<NaturalCircle>(v_); }
    const Line& line() const { return std::get<Line>(v_); }

  private:
    std::variant<NaturalCircle, Line> v_;
};

// An AlgebraicCircle below this threshold on |A| describes a line for all
// practical purposes; the test is scale-free in the coefficients.
inline bool represents_line(double A, double B, double C) {
    return std::abs(A) < 1e-12 * (B * B + C * C);
}

double signed_distance(const NaturalCircle& c, const Point& p);
double signed_distance(const Line& l, const Point& p);
// Sign caveat: with the A < 0 duplicate parametrization this returns the
// negated signed distance of the A > 0 twin; |d| is geometric either way.
double signed_distance(const AlgebraicCircle& c, const Point& p);
double signed_distance(const GeneralizedCircle& c, const Point& p);

double objective(const NaturalCircle& c, const DataSet& data);
double objective(const GeneralizedCircle& c, const DataSet& data);

double optimal_radius(const DataSet& data, double a, double b);
double reduced_objective(const DataSet& data, double a, double b);

struct Window {
    double x0, x1, y0, y1;
};

// values[i*nx + j] = reduced_objective at (a_j, b_i) on the regular grid
// spanning the window, endpoints included.
std::vector<double> contour_grid(const DataSet& data, const Window& w, int nx, int ny);

AlgebraicCircle normalize(const AlgebraicCircle& c);
GeneralizedCircle to_natural(const AlgebraicCircle& c);
AlgebraicCircle to_algebraic(const NaturalCircle& c, int sign);
AlgebraicCircle to_algebraic(const GeneralizedCircle& c);

// Rewrites coefficients fitted in coordinates u = p - t back to p coordinates.
AlgebraicCircle translate_frame(const AlgebraicCircle& c, double tx, double ty);
// Rewrites coefficients fitted in coordinates u = p / s back to p coordinates;
// both keep the constraint normalized exactly.
AlgebraicCircle scale_frame(const AlgebraicCircle& c, double s);

// Normalized coefficients with a deterministic sign choice (A > 0 for
// circles; lines flipped so D < 0, ties broken on B then C). Two fits of the
// same locus map to the same vector, whichever duplicate they report.
AlgebraicCircle canonical_algebraic(const AlgebraicCircle& c);
std::array<double, 4> canonical_coefficients(const GeneralizedCircle& c);

// Copies of the points with the centroid subtracted; every fitter works in
// this frame and maps its result back.
std::vector<Point> centered_points(const DataSet& data);

struct ParameterBox {
    double A_max, B_max, C_max, D_max;
};

// Explicit bounds containing every candidate minimizer for centered data.
ParameterBox parameter_box(const DataSet& data);

}  // namespace circlefit
