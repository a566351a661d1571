#pragma once

#include <cstdint>

#include "geometry.hpp"

namespace circlefit {

// n points drawn independently and uniformly from the open unit square.
// Requires n >= 3.
DataSet gen_uniform_square(std::size_t n, uint64_t seed);

// Circular-arc sample description. Angles are in degrees; the default start
// angle (NaN sentinel) centers the arc on the top of the circle. Noise is
// radial N(0, sigma^2) by default; isotropic_noise adds independent Gaussian
// offsets to both coordinates instead. random_angles replaces the
// equally-spaced angles with uniform draws over the arc.
struct ArcSpec {
    double radius = 1.0;
    double arc_degrees = 360.0;
    double sigma = 0.0;
    std::size_t n = 0;
    double center_x = 0.0;
    double center_y = 0.0;
    double start_degrees = kArcStartAuto;
    bool isotropic_noise = false;
    bool random_angles = false;

    static constexpr double kArcStartAuto = -1e300;
};

DataSet gen_arc(const ArcSpec& spec, uint64_t seed);

// Cross of the four unit points (+-1,0),(0,+-1) plus k copies of the origin.
// For k >= 4 the objective has several distinct minima of equal depth.
// Requires k >= 1.
DataSet gen_multi_minima(std::size_t k);

// Random circle guess: center uniform in the 5x5 square around the data
// centroid, radius chosen optimally for that center.
NaturalCircle gen_initial_guess(const DataSet& data, uint64_t seed);

}  // namespace circlefit
