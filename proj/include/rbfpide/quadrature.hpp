#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

namespace rbfpide::quadrature {

struct Options {
    double abs_tol = 1e-10;
    double rel_tol = 0.0;
    std::size_t max_subdivisions = 400;
};

struct Result {
    double value = 0.0;
    double abs_error = 0.0;
    /// Integral of |f|, used for the roundoff floor on the error target.
    double abs_integral = 0.0;
    std::size_t evaluations = 0;
    bool converged = true;
};

namespace detail {

// 15-point Kronrod nodes on [-1, 1] (non-negative half) with the embedded
// 7-point Gauss weights at odd positions.
inline constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a = 0.0;
    double b = 0.0;
    double value = 0.0;
    double error = 0.0;
    double abs_value = 0.0;

    bool operator<(const Segment& other) const { return error < other.error; }
};

template <class F>
Segment gk15(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f_center = f(center);
    double kronrod = f_center * kKronrodWeights[7];
    double gauss = f_center * kGaussWeights[3];
    double abs_sum = std::abs(f_center) * kKronrodWeights[7];
    std::array<double, 7> lo{};
    std::array<double, 7> hi{};
    for (std::size_t k = 0; k < 7; ++k) {
        const double dx = half * kNodes[k];
        lo[k] = f(center - dx);
        hi[k] = f(center + dx);
        const double pair = lo[k] + hi[k];
        kronrod += kKronrodWeights[k] * pair;
        abs_sum += kKronrodWeights[k] * (std::abs(lo[k]) + std::abs(hi[k]));
        if (k % 2 == 1) gauss += kGaussWeights[k / 2] * pair;
    }
    Segment s;
    s.a = a;
    s.b = b;
    s.value = kronrod * half;
    s.abs_value = abs_sum * std::abs(half);
    s.error = std::abs((kronrod - gauss) * half);
    return s;
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature. `breakpoints` must be
/// sorted and include both end points; the integrand is split there before
/// any adaptive bisection, which is where kinks and jumps belong.
template <class F>
Result integrate(F&& f, const std::vector<double>& breakpoints, const Options& options = {}) {
    Result result;
    if (breakpoints.size() < 2) return result;

    std::priority_queue<detail::Segment> heap;
    double total = 0.0;
    double total_error = 0.0;
    double total_abs = 0.0;
    for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
        if (!(breakpoints[k + 1] > breakpoints[k])) continue;
        auto seg = detail::gk15(f, breakpoints[k], breakpoints[k + 1]);
        result.evaluations += 15;
        total += seg.value;
        total_error += seg.error;
        total_abs += seg.abs_value;
        heap.push(seg);
    }

    auto target = [&] {
        constexpr double roundoff = 64.0 * std::numeric_limits<double>::epsilon();
        return std::max({options.abs_tol, options.rel_tol * std::abs(total), roundoff * total_abs});
    };

    std::size_t splits = 0;
    while (!heap.empty() && total_error > target()) {
        if (splits >= options.max_subdivisions) {
            result.converged = false;
            break;
        }
        const auto worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            result.converged = false;
            break;
        }
        heap.pop();
        auto left = detail::gk15(f, worst.a, mid);
        auto right = detail::gk15(f, mid, worst.b);
        result.evaluations += 30;
        total += left.value + right.value - worst.value;
        total_abs += left.abs_value + right.abs_value - worst.abs_value;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++splits;
    }

    // Re-sum from the pieces so the running updates leave no drift behind.
    total = 0.0;
    total_error = 0.0;
    total_abs = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        total_error += heap.top().error;
        total_abs += heap.top().abs_value;
        heap.pop();
    }
    result.value = total;
    result.abs_error = total_error;
    result.abs_integral = total_abs;
    return result;
}

template <class F>
Result integrate(F&& f, double a, double b, const Options& options = {}) {
    return integrate(std::forward<F>(f), std::vector<double>{a, b}, options);
}

}  // namespace rbfpide::quadrature
