#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "cshock/errors.hpp"
#include "cshock/parallel.hpp"
#include "cshock/rng.hpp"
#include "cshock/simulation.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cshock;
using cshock::testing::make_params;

namespace {

std::vector<double> price_column(const std::vector<GridPath>& paths, std::size_t m, std::size_t g) {
    std::vector<double> out;
    out.reserve(paths.size());
    for (const auto& p : paths) out.push_back(p.price(m, g));
    return out;
}

double sample_covariance(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = testing::mean(a), mb = testing::mean(b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
    return s / static_cast<double>(a.size() - 1);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Upper 1% point of chi-square via Wilson-Hilferty.
double chi2_upper_1pct(double df) {
    const double z = 2.3263478740408408;
    const double c = 2.0 / (9.0 * df);
    return df * std::pow(1.0 - c + z * std::sqrt(c), 3);
}

std::vector<double> cutoff_grid(const ModelParams& p) {
    std::vector<double> t;
    for (std::size_t m = 0; m < p.products(); ++m) t.push_back(p.grid.cutoff(m));
    return t;
}

ModelParams small_params() { return make_params(0.5, 3.0, 2.0, JumpLaw({0.05, 0.1}, {0.6, 0.4}), 6); }

}  // namespace

TEST_CASE("inhomogeneous sampler: zero scale, flat rate, compensator") {
    const JumpLaw law = JumpLaw::single(0.01);
    CHECK(sample_inhomogeneous_cpp(RateSpec{0.0, 0.5, 9.0, 0.0, 8.0}, law, 1).empty());
    CHECK_THROWS_AS(sample_inhomogeneous_cpp(RateSpec{-1.0, 0.5, 9.0, 0.0, 8.0}, law, 1), InvalidInput);

    // kappa = 0: homogeneous rate, uniform arrival times.
    {
        RandomStream rng(3, 0);
        const RateSpec rate{4.0, 0.0, 9.0, 1.0, 6.0};
        const int n = 20000;
        double count = 0.0;
        std::vector<double> u;
        for (int i = 0; i < n; ++i) {
            const auto ev = sample_inhomogeneous_cpp(rate, law, rng);
            count += static_cast<double>(ev.size());
            for (const auto& e : ev) {
                REQUIRE(e.time >= 1.0);
                REQUIRE(e.time <= 6.0);
                u.push_back((e.time - 1.0) / 5.0);
            }
            REQUIRE(std::is_sorted(ev.begin(), ev.end(), [](auto& a, auto& b) { return a.time < b.time; }));
        }
        CHECK(std::fabs(count / n - 20.0) < 3.0 * std::sqrt(20.0 / n));
        std::sort(u.begin(), u.end());
        double ks = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i)
            ks = std::max({ks, std::fabs(u[i] - static_cast<double>(i) / u.size()),
                           std::fabs(u[i] - static_cast<double>(i + 1) / u.size())});
        CHECK(ks < 1.63 / std::sqrt(static_cast<double>(u.size())));
    }

    // Mean count equals the compensator; times follow its normalised shape.
    {
        RandomStream rng(4, 0);
        const RateSpec rate{3.0, 0.7, 9.0, 0.0, 8.0};
        const double lambda = 3.0 * exp_integral(0.7, 9.0, 0.0, 8.0);
        const int n = 100000;
        double count = 0.0;
        double late = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto ev = sample_inhomogeneous_cpp(rate, law, rng, -1.0, 5);
            count += static_cast<double>(ev.size());
            for (const auto& e : ev) {
                REQUIRE(e.size == -0.01);
                REQUIRE(e.origin == 5);
                if (e.time > 4.0) late += 1.0;
            }
        }
        CHECK(std::fabs(count / n - lambda) < 3.0 * std::sqrt(lambda / n));
        const double late_mean = 3.0 * exp_integral(0.7, 9.0, 4.0, 8.0);
        CHECK(std::fabs(late / n - late_mean) < 3.0 * std::sqrt(late_mean / n));
    }
}

TEST_CASE("thinning without a common part shares no shock ids") {
    const auto p = make_params(0.5, 5.0, 0.0, JumpLaw::single(0.1), 8);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto path = simulate_thinning(p, InitialPrices(8, 0.0), seed);
        for (const auto& ev : path.events)
            for (const auto& e : ev) CHECK(e.origin == kIdiosyncratic);
    }
}

TEST_CASE("flat common intensity hits every product still open") {
    const auto p = make_params(0.0, 0.0, 1.5, JumpLaw::single(0.2), 10);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto path = simulate_thinning(p, InitialPrices(10, 0.0), seed);
        std::map<std::int64_t, std::pair<double, std::set<std::size_t>>> shocks;
        for (std::size_t m = 0; m < 10; ++m)
            for (const auto& e : path.events[m]) {
                REQUIRE(e.origin >= 0);
                shocks[e.origin].first = e.time;
                shocks[e.origin].second.insert(m);
            }
        for (const auto& [id, shock] : shocks) {
            std::set<std::size_t> open;
            for (std::size_t m = 0; m < 10; ++m)
                if (p.grid.maturity(m) >= shock.first) open.insert(m);
            CHECK(shock.second == open);
        }
    }
}

TEST_CASE("common shocks share time, size and a contiguous run of products") {
    const auto p = testing::de2022(12);
    for (Generator g : {Generator::Thinning, Generator::Decomposition}) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            RandomStream rng(seed, 1);
            const auto path = g == Generator::Thinning ? simulate_thinning(p, InitialPrices(12, 0.0), rng)
                                                       : simulate_decomposition(p, InitialPrices(12, 0.0), rng);
            std::map<std::int64_t, std::vector<std::pair<std::size_t, Event>>> shocks;
            for (std::size_t m = 0; m < 12; ++m) {
                const auto& ev = path.events[m];
                REQUIRE(std::is_sorted(ev.begin(), ev.end(), [](auto& a, auto& b) { return a.time < b.time; }));
                for (const auto& e : ev) {
                    REQUIRE(e.time >= 0.0);
                    REQUIRE(e.time <= p.grid.maturity(m));
                    if (e.origin >= 0) shocks[e.origin].push_back({m, e});
                }
            }
            for (const auto& [id, hits] : shocks) {
                const Event& first = hits.front().second;
                // The run starts at the first product still open at the shock time.
                std::size_t expected = 0;
                while (p.grid.maturity(expected) < first.time) ++expected;
                for (const auto& [m, e] : hits) {
                    CHECK(e.time == first.time);
                    CHECK(e.size == first.size);
                    CHECK(m == expected);
                    ++expected;
                }
            }
        }
    }
}

TEST_CASE("per-product jump counts match the compensator") {
    const auto p = small_params();
    const std::size_t M = p.products();
    for (Generator g : {Generator::Thinning, Generator::Decomposition}) {
        const int n = 40000;
        std::vector<double> count(M, 0.0);
        for (int i = 0; i < n; ++i) {
            RandomStream rng = RandomStream::child(11, i);
            const auto path = g == Generator::Thinning ? simulate_thinning(p, InitialPrices(M, 0.0), rng)
                                                       : simulate_decomposition(p, InitialPrices(M, 0.0), rng);
            for (std::size_t m = 0; m < M; ++m) count[m] += static_cast<double>(path.events[m].size());
        }
        for (std::size_t m = 0; m < M; ++m) {
            const double expected = 2.0 * integrated_intensity(p, m, 0.0, p.grid.maturity(m));
            CAPTURE(m);
            CHECK(std::fabs(count[m] / n - expected) < 3.0 * std::sqrt(expected / n));
        }
    }
}

TEST_CASE("decomposition layers have the right compensators") {
    const auto p = small_params();
    const std::size_t M = p.products();
    const auto& T = p.grid.maturities;
    const int n = 40000;
    double only_first = 0.0, all_open = 0.0;
    for (int i = 0; i < n; ++i) {
        RandomStream rng = RandomStream::child(12, i);
        const auto path = simulate_decomposition(p, InitialPrices(M, 0.0), rng);
        std::set<std::int64_t> in_second;
        for (const auto& e : path.events[1])
            if (e.origin >= 0) in_second.insert(e.origin);
        for (const auto& e : path.events[0])
            if (e.origin >= 0 && !in_second.count(e.origin)) only_first += 1.0;
        for (const auto& e : path.events[M - 1]) all_open += e.origin >= 0 ? 1.0 : 0.0;
    }
    // Layer reaching only the earliest product, and the layer reaching the last one.
    const double first_rate = 2.0 * p.mu_c *
                              (exp_integral(p.kappa, T[0], 0.0, T[0]) - exp_integral(p.kappa, T[1], 0.0, T[0]));
    const double last_rate = 2.0 * p.mu_c * exp_integral(p.kappa, T[M - 1], 0.0, T[M - 1]);
    CHECK(std::fabs(only_first / n - first_rate) < 3.0 * std::sqrt(first_rate / n));
    CHECK(std::fabs(all_open / n - last_rate) < 3.0 * std::sqrt(last_rate / n));
}

TEST_CASE("decomposition preconditions and the single-product case") {
    auto p = make_params(0.0, 1.0, 1.0, JumpLaw::single(0.1), 4);
    CHECK_THROWS_AS(simulate_decomposition(p, InitialPrices(4, 0.0), 1), InvalidInput);
    SimConfig cfg{1, 1, Generator::Decomposition};
    CHECK_THROWS_AS(simulate_batch(p, InitialPrices(4, 0.0), {1.0}, cfg), InvalidInput);
    CHECK_THROWS_AS(simulate_thinning(small_params(), InitialPrices(3, 0.0), 1), InvalidInput);

    // M = 1: both parts collapse to one compound Poisson process per sign.
    const auto q = make_params(0.4, 2.0, 3.0, JumpLaw::single(0.1), 1);
    const int n = 40000;
    double count = 0.0, up = 0.0;
    for (int i = 0; i < n; ++i) {
        RandomStream rng = RandomStream::child(5, i);
        const auto path = simulate_decomposition(q, {0.0}, rng);
        count += static_cast<double>(path.events[0].size());
        for (const auto& e : path.events[0]) up += e.size > 0.0 ? 1.0 : 0.0;
    }
    const double per_sign = integrated_intensity(q, 0, 0.0, 9.0);
    CHECK(std::fabs(count / n - 2.0 * per_sign) < 3.0 * std::sqrt(2.0 * per_sign / n));
    CHECK(std::fabs(up / n - per_sign) < 3.0 * std::sqrt(per_sign / n));
}

TEST_CASE("thinning and decomposition agree on the joint law of signed counts") {
    auto p = make_params(0.8, 0.5, 0.7, JumpLaw::single(0.1), 2);
    p.grid = MaturityGrid::hourly(2, 1.0, 0.5);
    const int n = 50000;
    auto histogram = [&](Generator g) {
        std::map<int, double> h;
        for (int i = 0; i < n; ++i) {
            RandomStream rng = RandomStream::child(g == Generator::Thinning ? 21 : 22, i);
            const auto path = g == Generator::Thinning ? simulate_thinning(p, {0.0, 0.0}, rng)
                                                       : simulate_decomposition(p, {0.0, 0.0}, rng);
            int key = 0;
            for (std::size_t m = 0; m < 2; ++m) {
                int up = 0, down = 0;
                for (const auto& e : path.events[m]) (e.size > 0 ? up : down)++;
                key = key * 9 + std::min(up, 2) * 3 + std::min(down, 2);
            }
            h[key] += 1.0;
        }
        return h;
    };
    const auto a = histogram(Generator::Thinning);
    const auto b = histogram(Generator::Decomposition);
    std::set<int> keys;
    for (const auto& [k, v] : a) keys.insert(k);
    for (const auto& [k, v] : b) keys.insert(k);
    double chi2 = 0.0, rest_a = 0.0, rest_b = 0.0;
    int bins = 0;
    for (int k : keys) {
        const double x = a.count(k) ? a.at(k) : 0.0;
        const double y = b.count(k) ? b.at(k) : 0.0;
        if (x + y < 20.0) {
            rest_a += x;
            rest_b += y;
            continue;
        }
        chi2 += (x - y) * (x - y) / (x + y);
        ++bins;
    }
    if (rest_a + rest_b > 0.0) {
        chi2 += (rest_a - rest_b) * (rest_a - rest_b) / (rest_a + rest_b);
        ++bins;
    }
    REQUIRE(bins > 10);
    CAPTURE(chi2);
    CHECK(chi2 < chi2_upper_1pct(bins - 1));
}

TEST_CASE("generators are martingales with the model covariation") {
    const auto p = small_params();
    const std::size_t M = p.products();
    const InitialPrices f0(M, 40.0);
    const std::vector<double> grid{2.0, 5.0, 9.0, 11.0, 13.0};
    const std::size_t n = 40000;
    for (Generator g : {Generator::Thinning, Generator::Decomposition, Generator::Diffusion}) {
        CAPTURE(generator_name(g));
        const auto paths = simulate_batch(p, f0, grid, SimConfig{n, 31, g});
        REQUIRE(paths.size() == n);
        for (std::size_t m = 0; m < M; ++m) {
            for (std::size_t k = 0; k < grid.size(); ++k) {
                auto x = price_column(paths, m, k);
                for (auto& v : x) v -= 40.0;
                const double sd = std::sqrt(testing::sample_variance(x));
                if (sd == 0.0) continue;
                CHECK(std::fabs(testing::mean(x)) < 3.0 * sd / std::sqrt(static_cast<double>(n)));
            }
        }
        // Terminal covariances against the closed form, including the freeze at cutoff.
        const std::size_t last = grid.size() - 1;
        for (std::size_t k = 0; k < M; ++k)
            for (std::size_t l = k; l < M; ++l) {
                const double t = std::min({grid[last], p.grid.cutoff(k), p.grid.cutoff(l)});
                const double expected = expected_covariation(p, k, l, 0.0, t);
                const auto xk = price_column(paths, k, last), xl = price_column(paths, l, last);
                const double got = sample_covariance(xk, xl);
                std::vector<double> prod(n);
                const double mk = testing::mean(xk), ml = testing::mean(xl);
                for (std::size_t i = 0; i < n; ++i) prod[i] = (xk[i] - mk) * (xl[i] - ml);
                const double se = std::sqrt(testing::sample_variance(prod) / static_cast<double>(n));
                CAPTURE(k);
                CAPTURE(l);
                CHECK(std::fabs(got - expected) < 4.0 * se);
            }
    }
}

TEST_CASE("terminal variance of decomposition matches thinning") {
    const auto p = testing::fr2019(8);
    const auto grid = cutoff_grid(p);
    const std::size_t n = 40000;
    const auto a = simulate_batch(p, InitialPrices(8, 0.0), grid, SimConfig{n, 41, Generator::Thinning});
    const auto b = simulate_batch(p, InitialPrices(8, 0.0), grid, SimConfig{n, 42, Generator::Decomposition});
    for (std::size_t m = 0; m < 8; ++m) {
        const auto xa = price_column(a, m, m), xb = price_column(b, m, m);
        const double va = testing::sample_variance(xa), vb = testing::sample_variance(xb);
        // Standard error of a sample variance from the fourth central moment.
        auto se = [&](const std::vector<double>& x, double v) {
            const double mu = testing::mean(x);
            double m4 = 0.0;
            for (double y : x) m4 += std::pow(y - mu, 4);
            m4 /= static_cast<double>(x.size());
            return std::sqrt((m4 - v * v) / static_cast<double>(x.size()));
        };
        CAPTURE(m);
        CHECK(std::fabs(va - vb) < 3.0 * std::hypot(se(xa, va), se(xb, vb)));
    }
}

TEST_CASE("common jump frequency matches the closed-form probability") {
    const auto p = make_params(0.5, 2.0, 1.0, JumpLaw::single(0.1), 6);
    const std::vector<std::size_t> m1{0, 1}, m2{2};
    const double u = 5.0, t = 6.0;
    const double prob = common_jump_probability(p, m1, m2, u, t);
    for (Generator g : {Generator::Thinning, Generator::Decomposition}) {
        const int n = 40000;
        double hits = 0.0;
        for (int i = 0; i < n; ++i) {
            RandomStream rng = RandomStream::child(g == Generator::Thinning ? 51 : 52, i);
            const auto path = g == Generator::Thinning ? simulate_thinning(p, InitialPrices(6, 0.0), rng)
                                                       : simulate_decomposition(p, InitialPrices(6, 0.0), rng);
            auto positive_common = [&](std::size_t m) {
                return std::any_of(path.events[m].begin(), path.events[m].end(), [&](const Event& e) {
                    return e.origin >= 0 && e.size > 0.0 && e.time > u && e.time <= t;
                });
            };
            if (positive_common(1) && !positive_common(2)) hits += 1.0;
        }
        CAPTURE(generator_name(g));
        CHECK(std::fabs(hits / n - prob) < 3.0 * std::sqrt(prob * (1.0 - prob) / n));
    }
}

TEST_CASE("diffusion generator: independence, correlation, PSD check") {
    {
        const auto p = make_params(0.5, 4.0, 0.0, JumpLaw::single(0.1), 4);
        const std::size_t n = 20000;
        const auto paths = simulate_batch(p, InitialPrices(4, 0.0), {7.0}, SimConfig{n, 61, Generator::Diffusion});
        for (std::size_t k = 0; k < 4; ++k)
            for (std::size_t l = k + 1; l < 4; ++l) {
                const auto a = price_column(paths, k, 0), b = price_column(paths, l, 0);
                const double r = sample_covariance(a, b) /
                                 std::sqrt(testing::sample_variance(a) * testing::sample_variance(b));
                CHECK(std::fabs(r) < 4.0 / std::sqrt(static_cast<double>(n)));
            }
    }
    {
        // 10^6 increments: 10^5 paths times ten disjoint windows.
        const auto p = testing::de2022(4);
        std::vector<double> grid;
        for (int g = 0; g <= 10; ++g) grid.push_back(0.7 * g);
        const DiffusionGenerator gen(p, grid);
        CHECK(gen.min_eigenvalue() > 0.0);
        double sxy = 0.0, sxx = 0.0, syy = 0.0;
        for (std::size_t i = 0; i < 100000; ++i) {
            RandomStream rng = RandomStream::child(62, i);
            const auto path = gen.simulate(InitialPrices(4, 0.0), rng);
            for (std::size_t g = 1; g < grid.size(); ++g) {
                // Normalise each window so the pooled increments are identically distributed.
                const double sk = std::sqrt(expected_covariation(p, 0, 0, grid[g - 1], grid[g]));
                const double sl = std::sqrt(expected_covariation(p, 2, 2, grid[g - 1], grid[g]));
                const double x = (path.price(0, g) - path.price(0, g - 1)) / sk;
                const double y = (path.price(2, g) - path.price(2, g - 1)) / sl;
                sxy += x * y;
                sxx += x * x;
                syy += y * y;
            }
        }
        CHECK(std::fabs(sxy / std::sqrt(sxx * syy) - model_correlation(p, 0, 2)) < 0.01);
    }
    {
        // Products past their cutoff stay frozen.
        const auto p = testing::de2022(3);
        RandomStream rng(63, 0);
        const auto path = simulate_diffusion(p, {1.0, 2.0, 3.0}, {7.5, 8.0, 9.0, 10.5}, rng);
        CHECK(path.price(0, 1) == path.price(0, 2));
        CHECK(path.price(0, 1) == path.price(0, 3));
        CHECK(path.price(1, 2) == path.price(1, 3));
        CHECK(path.price(2, 2) != path.price(2, 3));
    }
}

TEST_CASE("Poisson model approaches the diffusion limit under scaling") {
    // mu, mu_c scaled by n and jump sizes by 1/sqrt(n): Kolmogorov distance of
    // the terminal marginal to the limiting Gaussian shrinks as n grows.
    const std::size_t paths = 20000;
    double previous = 1.0, first = 0.0;
    for (double n : {1.0, 10.0, 100.0}) {
        const double size = 0.1 / std::sqrt(n);
        const auto p = make_params(0.5, 0.2 * n, 0.2 * n, JumpLaw::single(size), 3);
        const double sd = std::sqrt(expected_covariation(p, 1, 1, 0.0, p.grid.cutoff(1)));
        const auto batch = simulate_batch(p, InitialPrices(3, 0.0), cutoff_grid(p), SimConfig{paths, 71, Generator::Thinning});
        auto x = price_column(batch, 1, 1);
        std::sort(x.begin(), x.end());
        double ks = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double f = normal_cdf(x[i] / sd);
            ks = std::max({ks, std::fabs(f - static_cast<double>(i) / x.size()),
                           std::fabs(f - static_cast<double>(i + 1) / x.size())});
        }
        CAPTURE(n);
        CHECK(ks < previous);
        if (n == 1.0) first = ks;
        previous = ks;
        const auto a = price_column(batch, 0, 0), b = price_column(batch, 1, 0);
        const double r = sample_covariance(a, b) / std::sqrt(testing::sample_variance(a) * testing::sample_variance(b));
        const double t = p.grid.cutoff(0);
        const double expected = expected_covariation(p, 0, 1, 0.0, t) /
                                std::sqrt(expected_covariation(p, 0, 0, 0.0, t) * expected_covariation(p, 1, 1, 0.0, t));
        CHECK(std::fabs(r - expected) < 0.05);
    }
    // The lattice error shrinks like 1/sqrt(n).
    CHECK(previous < first / 5.0);
}

TEST_CASE("sampling event paths onto a grid") {
    const auto grid = MaturityGrid::hourly(2);
    EventPath empty{{50.0, 60.0}, {{}, {}}};
    const auto flat = sample_onto_grid(empty, grid, {0.0, 3.0, 20.0});
    for (std::size_t g = 0; g < 3; ++g) {
        CHECK(flat.price(0, g) == 50.0);
        CHECK(flat.price(1, g) == 60.0);
    }

    EventPath one{{50.0, 60.0}, {{{5.0, 0.10, kIdiosyncratic}}, {}}};
    const auto s = sample_onto_grid(one, grid, {0.0, 4.99, 5.0, 6.0});
    CHECK(s.price(0, 0) == 50.0);
    CHECK(s.price(0, 1) == 50.0);
    CHECK(s.price(0, 2) == 50.0 + 0.10);
    CHECK(s.price(0, 3) == 50.0 + 0.10);

    // Frozen after cutoff: an event after T - lead is ignored.
    EventPath late{{50.0, 60.0}, {{{8.5, 1.0, kIdiosyncratic}}, {}}};
    CHECK(sample_onto_grid(late, grid, {9.0}).price(0, 0) == 50.0);
    CHECK_THROWS_AS(sample_onto_grid(one, grid, {2.0, 1.0}), InvalidInput);

    // Prefix-sum oracle on the event-time grid.
    const auto p = testing::de2022(5);
    const auto path = simulate_thinning(p, InitialPrices(5, 10.0), 81);
    for (std::size_t m = 0; m < 5; ++m) {
        std::vector<double> times;
        for (const auto& e : path.events[m])
            if (e.time <= p.grid.cutoff(m)) times.push_back(e.time);
        times.erase(std::unique(times.begin(), times.end()), times.end());
        const auto gp = sample_onto_grid(path, p.grid, times);
        for (std::size_t g = 0; g < times.size(); ++g) {
            double level = 10.0;
            for (const auto& e : path.events[m])
                if (e.time <= times[g]) level += e.size;
            CHECK(gp.price(m, g) == doctest::Approx(level).epsilon(1e-12));
        }
    }
}

TEST_CASE("batches are deterministic and independent of the thread count") {
    const auto p = testing::de2022(6);
    const InitialPrices f0(6, 50.0);
    const std::vector<double> grid{1.0, 4.0, 8.0, 13.0};
    for (Generator g : {Generator::Thinning, Generator::Decomposition, Generator::Diffusion}) {
        SimConfig cfg{300, 99, g};
        set_thread_count(1);
        const auto a = simulate_batch(p, f0, grid, cfg);
        set_thread_count(4);
        const auto b = simulate_batch(p, f0, grid, cfg);
        set_thread_count(0);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].prices == b[i].prices);
        // Path i depends only on (seed, i).
        SimConfig shorter{100, 99, g};
        const auto c = simulate_batch(p, f0, grid, shorter);
        for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i].prices == a[i].prices);
    }
    CHECK(simulate_batch(p, f0, grid, SimConfig{0, 1, Generator::Thinning}).empty());
}

TEST_CASE("grid path writers") {
    const InitialPrices f0{50.0, 51.5};
    const std::vector<double> times{0.0, 7.25};
    GridPath g{times, {50.0, 50.25, 51.5, 49.0}, 2};

    std::stringstream bin;
    {
        GridPathWriter w(bin, GridPathWriter::Format::Binary, f0, times, 2);
        w.write(0, g);
        w.write(1, g);
    }
    const auto back = read_grid_paths_binary(bin);
    CHECK(back.f0 == f0);
    CHECK(back.times == times);
    REQUIRE(back.paths.size() == 2);
    CHECK(back.paths[1].prices == g.prices);

    std::stringstream truncated(bin.str().substr(0, bin.str().size() - 3));
    CHECK_THROWS_AS(read_grid_paths_binary(truncated), InvalidInput);
    std::stringstream wrong("XXXX");
    CHECK_THROWS_AS(read_grid_paths_binary(wrong), InvalidInput);

    std::stringstream csv;
    GridPathWriter w(csv, GridPathWriter::Format::Csv, f0, times, 1);
    w.write(3, g);
    std::string line;
    std::getline(csv, line);
    CHECK(line.rfind("# units", 0) == 0);
    std::getline(csv, line);
    CHECK(line == "path_id,product,time,price");
    std::getline(csv, line);
    CHECK(line == "3,1,0,50");
    std::getline(csv, line);
    CHECK(line == "3,1,7.25,50.25");
    std::getline(csv, line);
    CHECK(line == "3,2,0,51.5");
}

TEST_CASE("generator names round trip") {
    for (Generator g : {Generator::Thinning, Generator::Decomposition, Generator::Diffusion})
        CHECK(parse_generator(generator_name(g)) == g);
    CHECK_THROWS_AS(parse_generator("euler"), InvalidInput);
}
