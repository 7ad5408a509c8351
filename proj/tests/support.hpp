#pragma once

// Shared fixtures and independent oracles for the test suites.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "cshock/battery.hpp"
#include "cshock/model.hpp"

namespace cshock::testing {

// Discrete law on the 0.01 grid with the given first two moments: a single
// atom when m2 <= m1^2 (rounded published moments), otherwise a symmetric
// three-point law around m1.
inline JumpLaw moment_matched_law(double m1, double m2) {
    const double var = m2 - m1 * m1;
    const double centre = std::round(m1 * 100.0) / 100.0;
    if (var <= 1e-12) return JumpLaw::single(centre);
    for (int ticks = 1; ticks < 10000; ++ticks) {
        const double d = ticks / 100.0;
        const double q = var / (2.0 * d * d);
        if (q <= 0.5 && d < centre)
            return JumpLaw({centre - d, centre, centre + d}, {q, 1.0 - 2.0 * q, q});
    }
    return JumpLaw::single(centre);
}

inline ModelParams make_params(double kappa, double mu, double mu_c, JumpLaw law, std::size_t products = 24) {
    ModelParams p;
    p.kappa = kappa;
    p.mu = mu;
    p.mu_c = mu_c;
    p.grid = MaturityGrid::hourly(products);
    p.jump_law = std::move(law);
    return p;
}

// German 2022 fit: kappa 0.50, mu 71.96, mu_c 65.68, moments 1.31 / 1.72.
inline ModelParams de2022(std::size_t products = 24) {
    return make_params(0.50, 71.96, 65.68, moment_matched_law(1.31, 1.72), products);
}

// French 2019 fit: kappa 0.36, mu 7.12, mu_c 2.57, moments 0.79 / 0.62.
inline ModelParams fr2019(std::size_t products = 24) {
    return make_params(0.36, 7.12, 2.57, moment_matched_law(0.79, 0.62), products);
}

// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13,
                        int depth = 50) {
    std::function<double(double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fmid, double fhi, double whole, int d) {
            const double mid = 0.5 * (lo + hi);
            const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
            const double flm = f(lm), frm = f(rm);
            const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
            const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
            if (d <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
                return left + right + (left + right - whole) / 15.0;
            return rec(lo, mid, flo, flm, fmid, left, d - 1) + rec(mid, hi, fmid, frm, fhi, right, d - 1);
        };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), depth);
}

// Exhaustive search over every admissible control sequence. Gains are summed
// from the last step backwards, the same association as the DP recursion.
struct BruteForce {
    double value = -std::numeric_limits<double>::infinity();
    std::vector<std::vector<int>> argmax;
};

inline BruteForce brute_force_spot(const std::vector<double>& prices, const BatterySpec& spec) {
    const std::size_t n = prices.size();
    const auto levels = static_cast<int>(spec.levels());
    BruteForce best;
    std::vector<int> c(n, -1);
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= 3;
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t k = code;
        for (std::size_t i = 0; i < n; ++i, k /= 3) c[i] = static_cast<int>(k % 3) - 1;
        int s = 0;
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            s += c[i];
            ok = s >= 0 && s <= levels;
        }
        if (!ok) continue;
        double g = 0.0;
        for (std::size_t i = n; i-- > 0;) g = cashflow(c[i] * spec.power_mw, prices[i], spec.efficiency) + g;
        if (g > best.value) {
            best.value = g;
            best.argmax = {c};
        } else if (g == best.value) {
            best.argmax.push_back(c);
        }
    }
    return best;
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

}  // namespace cshock::testing
