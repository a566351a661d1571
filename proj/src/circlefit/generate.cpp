#include "generate.hpp"

#include <cmath>
#include <vector>

#include "error.hpp"
#include "rng.hpp"

namespace circlefit {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

DataSet gen_uniform_square(std::size_t n, uint64_t seed) {
    if (n < 3) fail(ErrorCode::Argument, "gen_uniform_square: need n >= 3");
    Rng rng = Rng::stream(seed, 0x5157u, 0);
    std::vector<Point> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = rng.next_unit();
        double y = rng.next_unit();
        pts.push_back({x, y});
    }
    return DataSet(std::move(pts));
}

DataSet gen_arc(const ArcSpec& spec, uint64_t seed) {
    if (spec.n < 3) fail(ErrorCode::Argument, "gen_arc: need n >= 3");
    if (!(spec.radius > 0.0)) fail(ErrorCode::Argument, "gen_arc: radius must be positive");
    if (!(spec.arc_degrees > 0.0) || spec.arc_degrees > 360.0)
        fail(ErrorCode::Argument, "gen_arc: arc must lie in (0, 360] degrees");
    if (!(spec.sigma >= 0.0)) fail(ErrorCode::Argument, "gen_arc: sigma must be nonnegative");

    const bool full = spec.arc_degrees == 360.0;
    double start_deg = spec.start_degrees;
    if (start_deg == ArcSpec::kArcStartAuto) start_deg = 90.0 - spec.arc_degrees / 2.0;
    const double start = start_deg * kPi / 180.0;
    const double arc = spec.arc_degrees * kPi / 180.0;
    // A full circle wraps, so the step avoids duplicating the seam point.
    const double step = full ? arc / static_cast<double>(spec.n)
                             : arc / static_cast<double>(spec.n - 1);

    Rng rng = Rng::stream(seed, 0xA2Cu, 0);
    std::vector<Point> pts;
    pts.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        double theta = spec.random_angles ? start + arc * rng.next_unit()
                                          : start + step * static_cast<double>(i);
        double c = std::cos(theta);
        double s = std::sin(theta);
        double x, y;
        if (spec.isotropic_noise) {
            x = spec.center_x + spec.radius * c + spec.sigma * rng.next_gaussian();
            y = spec.center_y + spec.radius * s + spec.sigma * rng.next_gaussian();
        } else {
            double r = spec.radius + spec.sigma * rng.next_gaussian();
            x = spec.center_x + r * c;
            y = spec.center_y + r * s;
        }
        pts.push_back({x, y});
    }
    return DataSet(std::move(pts));
}

DataSet gen_multi_minima(std::size_t k) {
    if (k < 1) fail(ErrorCode::Argument, "gen_multi_minima: need k >= 1");
    std::vector<Point> pts;
    pts.reserve(4 + k);
    pts.push_back({1.0, 0.0});
    pts.push_back({0.0, 1.0});
    pts.push_back({-1.0, 0.0});
    pts.push_back({0.0, -1.0});
    for (std::size_t i = 0; i < k; ++i) pts.push_back({0.0, 0.0});
    return DataSet(std::move(pts));
}

NaturalCircle gen_initial_guess(const DataSet& data, uint64_t seed) {
    Rng rng = Rng::stream(seed, 0x16E55u, 0);
    double a = data.centroid_x() + 5.0 * (rng.next_unit() - 0.5);
    double b = data.centroid_y() + 5.0 * (rng.next_unit() - 0.5);
    double r = optimal_radius(data, a, b);
    return {a, b, r};
}

}  // namespace circlefit
