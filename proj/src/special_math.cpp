// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

#include "scalereg/special_math.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "scalereg/errors.hpp"

namespace scalereg {

void QuadratureSpec::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
        throw DomainError("QuadratureSpec: tolerances must be strictly positive");
    if (max_subdivisions < 1)
        throw DomainError("QuadratureSpec: max_subdivisions must be >= 1");
}

double log_gamma(double z) {
    if (!(z > 0.0))
        throw DomainError("log_gamma: argument must be positive");

    // Lanczos approximation, g = 7, 9 coefficients (Godfrey's set).
    static constexpr double kCoeff[] = {
        0.99999999999980993,    676.5203681218851,     -1259.1392167224028,
        771.32342877765313,     -176.61502916214059,   12.507343278686905,
        -0.13857109526572012,   9.9843695780195716e-6, 1.5056327351493116e-7,
    };
    static constexpr double kHalfLogTwoPi = 0.91893853320467274178;

    if (z < 0.5) {
        // Reflection keeps the Lanczos series in its accurate range.
        return std::log(M_PI / std::sin(M_PI * z)) - log_gamma(1.0 - z);
    }

    const double x = z - 1.0;
    double series = kCoeff[0];
    for (int k = 1; k < 9; ++k) series += kCoeff[k] / (x + k);
    const double t = x + 7.5;
    return kHalfLogTwoPi + (x + 0.5) * std::log(t) - t + std::log(series);
}

namespace {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK dqk15).
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000,
};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469,
};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

Segment evaluate_segment(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kronrod = kWgk[7] * fc;
    double gauss = kWg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double v = f(c - h * kXgk[i]) + f(c + h * kXgk[i]);
        kronrod += kWgk[i] * v;
        if (i % 2 == 1) gauss += kWg[i / 2] * v;
    }
    Segment s;
    s.a = a;
    s.b = b;
    s.value = kronrod * h;
    s.error = std::abs((kronrod - gauss) * h);
    return s;
}

QuadratureResult adapt(const std::function<double(double)>& f, double a, double b,
                       const QuadratureSpec& spec) {
    spec.validate();
    std::priority_queue<Segment> queue;
    queue.push(evaluate_segment(f, a, b));
    int subdivisions = 1;

    auto totals = [&queue]() {
        // Rebuilding the sums each round keeps them free of cancellation drift.
        std::priority_queue<Segment> copy = queue;
        double value = 0.0, error = 0.0;
        while (!copy.empty()) {
            value += copy.top().value;
            error += copy.top().error;
            copy.pop();
        }
        return std::pair<double, double>(value, error);
    };

    double value = queue.top().value;
    double error = queue.top().error;
    while (error > std::max(spec.abs_tol, spec.rel_tol * std::abs(value))) {
        if (subdivisions >= spec.max_subdivisions) {
            throw QuadratureError("quadrature did not converge within max_subdivisions",
                                  value, error);
        }
        Segment worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // Interval too narrow to split further; accept what we have.
            queue.push(worst);
            break;
        }
        queue.push(evaluate_segment(f, worst.a, mid));
        queue.push(evaluate_segment(f, mid, worst.b));
        ++subdivisions;
        std::tie(value, error) = totals();
        if (!std::isfinite(value))
            throw QuadratureError("quadrature produced a non-finite value", value, error);
    }

    QuadratureResult result;
    result.value = value;
    result.error_bound = error;
    result.subdivisions = subdivisions;
    return result;
}

}  // namespace

QuadratureResult integrate_half_line(const std::function<double(double)>& f,
                                     const QuadratureSpec& spec, double lower) {
    if (!(lower >= 0.0) || !std::isfinite(lower))
        throw DomainError("integrate_half_line: lower cutoff must be finite and >= 0");
    // t = u/(1-u) maps (0,1) onto (0,inf); dt = du/(1-u)^2.
    auto transformed = [&f](double u) {
        const double om = 1.0 - u;
        const double t = u / om;
        const double fx = f(t);
        if (fx == 0.0) return 0.0;  // avoid 0 * inf at the far end
        return fx / (om * om);
    };
    const double u0 = lower / (1.0 + lower);
    return adapt(transformed, u0, 1.0, spec);
}

QuadratureResult integrate_finite(const std::function<double(double)>& f, double a, double b,
                                  const QuadratureSpec& spec) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b))
        throw DomainError("integrate_finite: need finite a < b");
    return adapt(f, a, b, spec);
}

double gauss_kronrod_panel(const std::function<double(double)>& f, double a, double b) {
    return evaluate_segment(f, a, b).value;
}

}  // namespace scalereg
