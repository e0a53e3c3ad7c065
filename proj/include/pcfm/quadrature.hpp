#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <vector>

namespace pcfm::quad {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

struct AdaptiveOptions {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    std::size_t max_evaluations = 2'000'000;
    /// Each initial interval is split into this many equal panels before refinement.
    std::size_t initial_panels = 1;
};

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double s = f(c - dx) + f(c + dx);
        kron += kWgk[j] * s;
        if (j % 2 == 1) gauss += kWg[j / 2] * s;
    }
    return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

struct LegendreRule {
    std::vector<double> nodes, weights;
};

inline LegendreRule make_legendre(int n) {
    LegendreRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
                break;
            }
            r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        r.nodes[i] = x;
    }
    return r;
}

inline const LegendreRule& legendre20() {
    static const LegendreRule rule = make_legendre(20);
    return rule;
}

}  // namespace detail

/// Fixed 20-point Gauss-Legendre on `panels` equal sub-intervals of [a, b].
template <class F>
double gauss_legendre_composite(F&& f, double a, double b, std::size_t panels) {
    const auto& rule = detail::legendre20();
    panels = std::max<std::size_t>(panels, 1);
    const double w = (b - a) / static_cast<double>(panels);
    double total = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = a + w * static_cast<double>(p);
        const double c = lo + 0.5 * w;
        double s = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            s += rule.weights[i] * f(c + 0.5 * w * rule.nodes[i]);
        total += 0.5 * w * s;
    }
    return total;
}

/// Globally adaptive Gauss-Kronrod 7/15 over the union of consecutive
/// intervals [breaks[i], breaks[i+1]]. The panel with the largest error
/// estimate is bisected until the summed estimate meets the tolerance or the
/// evaluation budget runs out; the result then reports converged = false.
template <class F>
QuadResult integrate_adaptive(F&& f, std::span<const double> breaks,
                              const AdaptiveOptions& opt = {}) {
    QuadResult res;
    if (breaks.size() < 2) {
        res.converged = true;
        return res;
    }
    std::priority_queue<detail::Panel> heap;
    double value = 0.0, error = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double a = breaks[i], b = breaks[i + 1];
        if (!(b > a)) continue;
        const std::size_t n = std::max<std::size_t>(opt.initial_panels, 1);
        const double w = (b - a) / static_cast<double>(n);
        for (std::size_t p = 0; p < n; ++p) {
            const double lo = a + w * static_cast<double>(p);
            const double hi = p + 1 == n ? b : lo + w;
            auto panel = detail::gk15(f, lo, hi);
            res.evaluations += 15;
            value += panel.value;
            error += panel.error;
            heap.push(panel);
        }
    }
    auto done = [&] {
        return error <= std::max(opt.abs_tol, opt.rel_tol * std::abs(value));
    };
    while (!heap.empty() && !done()) {
        if (res.evaluations + 30 > opt.max_evaluations) break;
        const auto worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break;
        heap.pop();
        const auto left = detail::gk15(f, worst.a, mid);
        const auto right = detail::gk15(f, mid, worst.b);
        res.evaluations += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of the running updates.
    value = 0.0;
    error = 0.0;
    std::vector<detail::Panel> panels;
    panels.reserve(heap.size());
    while (!heap.empty()) {
        panels.push_back(heap.top());
        heap.pop();
    }
    std::sort(panels.begin(), panels.end(),
              [](const auto& l, const auto& r) { return l.a < r.a; });
    for (const auto& p : panels) {
        value += p.value;
        error += p.error;
    }
    res.value = value;
    res.error = error;
    res.converged = done();
    return res;
}

template <class F>
QuadResult integrate_adaptive(F&& f, double a, double b, const AdaptiveOptions& opt = {}) {
    const std::array<double, 2> br{a, b};
    return integrate_adaptive(std::forward<F>(f), std::span<const double>(br), opt);
}

}  // namespace pcfm::quad
