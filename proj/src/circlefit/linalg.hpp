#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace circlefit {

using Mat4 = std::array<std::array<double, 4>, 4>;
using Vec4 = std::array<double, 4>;

// Gaussian elimination with partial pivoting on an N x N system, in place.
// Returns false when the smallest pivot falls below pivot_tol.
template <std::size_t N>
bool solve_linear(std::array<std::array<double, N>, N> a, std::array<double, N> rhs,
                  std::array<double, N>& x, double pivot_tol) {
    std::array<std::size_t, N> perm;
    for (std::size_t i = 0; i < N; ++i) perm[i] = i;
    for (std::size_t col = 0; col < N; ++col) {
        std::size_t best = col;
        for (std::size_t row = col + 1; row < N; ++row)
            if (std::abs(a[perm[row]][col]) > std::abs(a[perm[best]][col])) best = row;
        std::swap(perm[col], perm[best]);
        double pivot = a[perm[col]][col];
        if (std::abs(pivot) <= pivot_tol) return false;
        for (std::size_t row = col + 1; row < N; ++row) {
            double f = a[perm[row]][col] / pivot;
            if (f == 0.0) continue;
            for (std::size_t k = col; k < N; ++k) a[perm[row]][k] -= f * a[perm[col]][k];
            rhs[perm[row]] -= f * rhs[perm[col]];
        }
    }
    for (std::size_t i = N; i-- > 0;) {
        double s = rhs[perm[i]];
        for (std::size_t k = i + 1; k < N; ++k) s -= a[perm[i]][k] * x[k];
        x[i] = s / a[perm[i]][i];
    }
    return true;
}

inline double det3(double a, double b, double c, double d, double e, double f, double g, double h,
                   double i) {
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
}

inline double det4(const Mat4& m) {
    double d = 0.0;
    for (std::size_t col = 0; col < 4; ++col) {
        std::array<double, 9> sub;
        std::size_t k = 0;
        for (std::size_t r = 1; r < 4; ++r)
            for (std::size_t c = 0; c < 4; ++c)
                if (c != col) sub[k++] = m[r][c];
        double minor =
            det3(sub[0], sub[1], sub[2], sub[3], sub[4], sub[5], sub[6], sub[7], sub[8]);
        d += ((col % 2 == 0) ? 1.0 : -1.0) * m[0][col] * minor;
    }
    return d;
}

inline Vec4 mat_vec(const Mat4& m, const Vec4& v) {
    Vec4 r{};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) r[i] += m[i][j] * v[j];
    return r;
}

inline double dot(const Vec4& a, const Vec4& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

inline double norm_inf(const Vec4& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double frobenius(const Mat4& m) {
    double s = 0.0;
    for (const auto& row : m)
        for (double x : row) s += x * x;
    return std::sqrt(s);
}

// Transposed cofactor matrix; columns span the null space when rank(m) = 3.
inline Mat4 adjugate(const Mat4& m) {
    Mat4 adj{};
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            std::array<double, 9> sub;
            std::size_t k = 0;
            for (std::size_t r = 0; r < 4; ++r) {
                if (r == i) continue;
                for (std::size_t c = 0; c < 4; ++c) {
                    if (c == j) continue;
                    sub[k++] = m[r][c];
                }
            }
            double minor =
                det3(sub[0], sub[1], sub[2], sub[3], sub[4], sub[5], sub[6], sub[7], sub[8]);
            adj[j][i] = (((i + j) % 2 == 0) ? 1.0 : -1.0) * minor;
        }
    }
    return adj;
}

// Polynomial with coefficients stored highest-degree first.
struct Poly {
    std::array<double, 5> c{};
    int degree = 0;

    double eval(double x) const {
        double v = c[0];
        for (int i = 1; i <= degree; ++i) v = v * x + c[i];
        return v;
    }

    double eval_derivative(double x) const {
        double v = c[0] * degree;
        for (int i = 1; i < degree; ++i) v = v * x + c[i] * (degree - i);
        return v;
    }

    double coefficient_scale() const {
        double m = 0.0;
        for (int i = 0; i <= degree; ++i) m = std::max(m, std::abs(c[i]));
        return m;
    }
};

}  // namespace circlefit
