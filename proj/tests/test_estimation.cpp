#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "cshock/errors.hpp"
#include "cshock/estimation.hpp"
#include "cshock/rng.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cshock;
using cshock::testing::make_params;

namespace {

const Date kMonday = parse_date("2022-01-03");

TickDataset one_product(std::vector<std::vector<Tick>> sessions, double cutoff = 8.0) {
    TickDataset d;
    d.grid = MaturityGrid::hourly(1, cutoff + 1.0);
    for (std::size_t i = 0; i < sessions.size(); ++i)
        d.sessions.push_back({kMonday + std::chrono::days(static_cast<int>(i)), {std::move(sessions[i])}});
    return d;
}

TickDataset scaled(const TickDataset& data, double c) {
    TickDataset out = data;
    for (auto& s : out.sessions)
        for (auto& ticks : s.products)
            for (auto& t : ticks) t.price *= c;
    return out;
}

// Mean and standard error of a per-batch statistic.
std::pair<double, double> batch_stats(const std::vector<double>& v) {
    return {testing::mean(v), std::sqrt(testing::sample_variance(v) / static_cast<double>(v.size()))};
}

}  // namespace

TEST_CASE("tick CSV parsing, ties and errors") {
    std::istringstream in(
        "# units: seconds\n"
        "delivery_date,product,timestamp_s,price\n"
        "2022-01-03,2,7200,51.5\n"
        "2022-01-03,2,3600,50.0\n"
        "2022-01-03,2,3600,50.25\n"
        "2022-01-03,1,0,40\n"
        "2022-01-02,1,10,39\n");
    const auto d = read_ticks_csv(in, MaturityGrid::hourly(2));
    REQUIRE(d.sessions.size() == 2);
    CHECK(d.sessions[0].delivery_date == parse_date("2022-01-02"));
    const auto& p2 = d.sessions[1].products[1];
    REQUIRE(p2.size() == 2);
    CHECK(p2[0].time == 1.0);
    CHECK(p2[0].price == 50.25);  // last record of a shared timestamp wins
    CHECK(p2[1].time == 2.0);

    auto error_of = [](const std::string& text) {
        std::istringstream s(text);
        try {
            read_ticks_csv(s, MaturityGrid::hourly(2), "ticks.csv");
        } catch (const InvalidInput& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    const std::string header = "delivery_date,product,timestamp_s,price\n";
    CHECK(error_of(header + "2022-01-03,1,0,40\n2022-01-03,1,abc,40\n").find("ticks.csv:3:") != std::string::npos);
    CHECK(error_of(header + "2022-01-03,3,0,40\n").find("ticks.csv:2:") != std::string::npos);
    CHECK(error_of(header + "2022-13-03,1,0,40\n").find("ticks.csv:2:") != std::string::npos);
    CHECK(error_of(header + "2022-01-03,1,0\n").find("expected 4 fields") != std::string::npos);
    CHECK(error_of(header + "2022-01-03,1,28900,40\n").find("cutoff") != std::string::npos);
    CHECK(error_of(header + "2022-01-03,1,10,nan\n").find("ticks.csv:2:") != std::string::npos);
    CHECK(error_of("date,product,timestamp_s,price\n2022-01-03,1,0,40\n").find("ticks.csv:1:") != std::string::npos);
    CHECK(error_of("delivery_date,prod,timestamp_s,price\n").find("header") != std::string::npos);

    std::ostringstream out;
    write_ticks_csv(d, out);
    std::istringstream back(out.str());
    const auto e = read_ticks_csv(back, MaturityGrid::hourly(2));
    REQUIRE(e.sessions.size() == d.sessions.size());
    for (std::size_t s = 0; s < d.sessions.size(); ++s)
        for (std::size_t m = 0; m < 2; ++m) {
            REQUIRE(e.sessions[s].products[m].size() == d.sessions[s].products[m].size());
            for (std::size_t i = 0; i < d.sessions[s].products[m].size(); ++i) {
                CHECK(e.sessions[s].products[m][i].time == doctest::Approx(d.sessions[s].products[m][i].time));
                CHECK(e.sessions[s].products[m][i].price == d.sessions[s].products[m][i].price);
            }
        }
    CHECK_THROWS_AS(load_ticks_csv("/nonexistent/ticks.csv"), IoError);
}

TEST_CASE("spot CSV parsing") {
    std::istringstream ok("delivery_date,product,spot_price\n2022-01-03,2,41\n2022-01-03,1,40.5\n");
    const auto t = read_spot_csv(ok, 2);
    REQUIRE(t.size() == 1);
    CHECK(t.begin()->second == std::vector<double>{40.5, 41.0});

    std::istringstream dup("2022-01-03,1,40\n2022-01-03,1,41\n");
    CHECK_THROWS_WITH_AS(read_spot_csv(dup, 1, "spot.csv"), doctest::Contains("spot.csv:2:"), InvalidInput);
    std::istringstream missing("2022-01-03,1,40\n");
    CHECK_THROWS_WITH_AS(read_spot_csv(missing, 2), doctest::Contains("incomplete"), InvalidInput);

    std::ostringstream out;
    write_spot_csv(t, out);
    std::istringstream back(out.str());
    CHECK(read_spot_csv(back, 2) == t);
}

TEST_CASE("cleaning removes isolated spikes only") {
    // Equal returns: nothing removed.
    std::vector<Tick> ramp;
    for (int i = 0; i < 50; ++i) ramp.push_back({0.1 * i, 40.0 + 0.01 * i});
    const auto [same, rep0] = clean(one_product({ramp}));
    CHECK(rep0.products[0].removed == 0);
    CHECK(same.sessions[0].products[0].size() == ramp.size());

    // A single 10000-tick spike among +-1 tick noise.
    RandomStream rng(5, 0);
    std::vector<Tick> noisy;
    double level = 50.0;
    for (int i = 0; i < 2000; ++i) {
        level += rng.coin() ? 0.01 : -0.01;
        noisy.push_back({0.003 * i, level});
    }
    noisy[1000].price += 100.0;
    const auto [cleaned, rep1] = clean(one_product({noisy}));
    CHECK(rep1.products[0].removed == 1);
    const auto& kept = cleaned.sessions[0].products[0];
    CHECK(std::none_of(kept.begin(), kept.end(), [&](const Tick& t) { return t.time == noisy[1000].time; }));

    // 1% of ticks replaced by 20-sigma spikes: the removed fraction is about 1%.
    std::vector<std::vector<Tick>> sessions;
    std::size_t spikes = 0, returns = 0;
    for (int s = 0; s < 20; ++s) {
        std::vector<Tick> ticks;
        double x = 50.0;
        for (int i = 0; i < 1000; ++i) {
            x += rng.coin() ? 0.01 : -0.01;
            double price = x;
            if (i > 0 && rng.uniform() < 0.01) {
                price += (rng.coin() ? 1.0 : -1.0) * 20.0 * 0.01;
                ++spikes;
            }
            ticks.push_back({0.007 * i, price});
        }
        returns += ticks.size() - 1;
        sessions.push_back(std::move(ticks));
    }
    const auto [c2, rep2] = clean(one_product(sessions));
    CHECK(rep2.products[0].total == returns);
    CHECK(rep2.products[0].removed == spikes);
    CHECK(rep2.products[0].removed_fraction() == doctest::Approx(0.01).epsilon(0.3));

    CHECK_THROWS_AS(clean(TickDataset{}), InvalidInput);
}

TEST_CASE("realized covariation on hand-built sessions") {
    SessionTicks s{kMonday, {{{0.0, 50.0}}, {{0.0, 50.0}, {3.2, 52.0}}, {{1.0, 10.0}, {3.3, 9.0}, {6.1, 12.0}}}};
    CHECK(realized_covariation(s, 0, 0, 0.5, 0.0, 8.0) == 0.0);
    CHECK(realized_covariation(s, 1, 1, 0.5, 0.0, 8.0) == 4.0);
    // Product 3 starts at 10 before its first tick; increments -1 and +3.
    CHECK(realized_covariation(s, 2, 2, 0.5, 0.0, 8.0) == 10.0);
    CHECK(realized_covariation(s, 1, 2, 0.5, 0.0, 8.0) == -2.0);
    // One cell covering the whole window.
    CHECK(realized_covariation(s, 1, 2, 8.0, 0.0, 8.0) == 4.0);
    CHECK(covariation_increment(s, 2, 2, 0.5, 4.0, 8.0) == 9.0);
    CHECK(realized_covariation(s, 1, 1, 0.5, 0.0, 0.49) == 0.0);
    CHECK_THROWS_AS(realized_covariation(s, 3, 0, 0.5, 0.0, 8.0), InvalidInput);
    CHECK_THROWS_AS(realized_covariation(s, 0, 0, 0.0, 0.0, 8.0), InvalidInput);
}

TEST_CASE("mean realized covariation matches the closed form") {
    const auto p = testing::fr2019(6);
    const auto data = synthesize_ticks(p, InitialPrices(6, 30.0), 10000, kMonday, 17);
    const double t = 8.0;  // inside every product's trading window
    for (auto [k, l] : {std::pair<std::size_t, std::size_t>{2, 2}, {2, 3}, {0, 5}}) {
        std::vector<double> v;
        for (const auto& s : data.sessions) v.push_back(realized_covariation(s, k, l, 0.5, 0.0, t));
        const double expected = expected_covariation(p, k, l, 0.0, t);
        CAPTURE(k);
        CAPTURE(l);
        const auto [mean, se] = batch_stats(v);
        CHECK(std::fabs(mean - expected) < 3.0 * se);
    }
}

TEST_CASE("signature plot: flat on model data, decreasing under bounce noise") {
    const auto p = testing::fr2019(4);
    const auto data = synthesize_ticks(p, InitialPrices(4, 30.0), 4000, kMonday, 18);
    CHECK(signature_plot(data, 2, {}).empty());
    const std::vector<double> deltas{0.25, 0.5, 1.0, 2.0};
    const auto curve = signature_plot(data, 2, deltas);
    REQUIRE(curve.size() == deltas.size());
    const double horizon = p.grid.cutoff(2);
    for (const auto& pt : curve) {
        const double covered = std::floor(horizon / pt.delta) * pt.delta;
        const double expected = expected_covariation(p, 2, 2, 0.0, covered) / horizon;
        std::vector<double> v;
        for (const auto& s : data.sessions) v.push_back(covariation_increment(s, 2, 2, pt.delta, 0.0, horizon) / horizon);
        const auto [mean, se] = batch_stats(v);
        CHECK(pt.value == doctest::Approx(mean).epsilon(1e-12));
        CHECK(std::fabs(pt.value - expected) < 3.0 * se);
    }

    // Bid-ask bounce on top of a slow random walk.
    RandomStream rng(19, 0);
    std::vector<std::vector<Tick>> sessions;
    for (int d = 0; d < 50; ++d) {
        std::vector<Tick> ticks;
        double x = 50.0;
        for (int i = 0; i < 480; ++i) {
            if (rng.uniform() < 0.05) x += rng.coin() ? 0.01 : -0.01;
            ticks.push_back({i / 60.0, x + (rng.coin() ? 0.25 : -0.25)});
        }
        sessions.push_back(std::move(ticks));
    }
    const auto noisy = signature_plot(one_product(sessions), 0, {1.0 / 60.0, 0.1, 0.5, 2.0});
    for (std::size_t i = 1; i < noisy.size(); ++i) CHECK(noisy[i].value < noisy[i - 1].value);
}

TEST_CASE("Epps correlation") {
    const auto w = [](const ModelParams& p) { return EstimationWindows::standard(p.grid); };
    {
        const auto p = make_params(0.5, 6.0, 0.0, JumpLaw::single(0.1), 3);
        const auto data = synthesize_ticks(p, InitialPrices(3, 30.0), 2000, kMonday, 20);
        CHECK(*epps_correlation(data, 1, 1, 0.5, w(p)) == 1.0);
        // Batch estimates give the noise band.
        std::vector<double> r;
        for (std::size_t b = 0; b < 20; ++b) {
            TickDataset part = data;
            part.sessions.assign(data.sessions.begin() + b * 100, data.sessions.begin() + (b + 1) * 100);
            r.push_back(*epps_correlation(part, 0, 1, 0.5, w(p)));
        }
        const auto [mean, se] = batch_stats(r);
        CHECK(std::fabs(mean) < 3.0 * se);
    }
    {
        const auto p = testing::de2022(3);
        const auto data = synthesize_ticks(p, InitialPrices(3, 80.0), 2000, kMonday, 21);
        std::vector<double> r;
        for (std::size_t b = 0; b < 20; ++b) {
            TickDataset part = data;
            part.sessions.assign(data.sessions.begin() + b * 100, data.sessions.begin() + (b + 1) * 100);
            r.push_back(*epps_correlation(part, 0, 1, 0.5, w(p)));
        }
        const auto [mean, se] = batch_stats(r);
        CHECK(std::fabs(mean - model_correlation(p, 0, 1)) < 3.0 * se);
        const double pooled = *epps_correlation(data, 0, 1, 0.5, w(p));
        CHECK(pooled == doctest::Approx(*epps_correlation(data, 1, 0, 0.5, w(p))).epsilon(1e-14));
        CHECK(std::fabs(pooled) <= 1.0);
    }
    {
        // Zero denominator: a product that never moves.
        const auto d = one_product({{{0.0, 5.0}}});
        auto two = d;
        two.grid = MaturityGrid::hourly(2);
        two.sessions[0].products.push_back({{0.0, 6.0}, {3.0, 7.0}});
        CHECK_FALSE(epps_correlation(two, 0, 1, 0.5, EstimationWindows::standard(two.grid)).has_value());
        auto narrow = EstimationWindows::standard(two.grid);
        narrow.begin = {7.5, 7.5};
        CHECK_THROWS_AS(epps_correlation(two, 0, 1, 0.5, narrow), InvalidInput);
    }
}

TEST_CASE("jump law fit") {
    CHECK(fit_jump_law(one_product({{{0.0, 1.0}, {1.0, 1.01}, {2.0, 1.0}, {3.0, 0.99}}})) == JumpLaw::single(0.01));
    CHECK_THROWS_AS(fit_jump_law(one_product({{{0.0, 1.0}, {1.0, 1.0}}})), InvalidInput);

    const JumpLaw truth({0.01, 0.02, 0.05, 0.3}, {0.55, 0.25, 0.15, 0.05});
    RandomStream rng(22, 0);
    std::vector<Tick> ticks;
    double x = 0.0;
    for (int i = 0; i <= 1000000; ++i) {
        ticks.push_back({i * 7e-6, x});
        x += (rng.coin() ? 1.0 : -1.0) * truth.sample(rng);
    }
    const auto law = fit_jump_law(one_product({ticks}));
    CHECK(total_variation(law, truth) < 0.01);
}

TEST_CASE("kappa estimation") {
    {
        const auto p = make_params(0.0, 4.0, 4.0, JumpLaw::single(0.05), 6);
        const auto data = synthesize_ticks(p, InitialPrices(6, 20.0), 1000, kMonday, 23);
        const auto w = EstimationWindows::standard(p.grid);
        CHECK(estimate_kappa(data, w).kappa <= 0.05);
    }
    const auto p = make_params(0.5, 10.0, 8.0, JumpLaw::single(0.05), 8);
    const auto w = EstimationWindows::standard(p.grid);
    // The contrast at the true kappa beats kappa/2 and 2 kappa on average.
    double at_truth = 0.0, at_half = 0.0, at_double = 0.0;
    for (std::uint64_t rep = 0; rep < 5; ++rep) {
        const auto data = synthesize_ticks(p, InitialPrices(8, 20.0), 200, kMonday, 100 + rep);
        const KappaContrast contrast(data, w);
        at_truth += contrast(0.5);
        at_half += contrast(0.25);
        at_double += contrast(1.0);
    }
    CHECK(at_truth <= at_half);
    CHECK(at_truth <= at_double);

    const auto data = synthesize_ticks(p, InitialPrices(8, 20.0), 1000, kMonday, 24);
    const auto fit = estimate_kappa(data, w);
    CHECK(fit.kappa >= 0.45);
    CHECK(fit.kappa <= 0.55);
    CHECK(estimate_kappa(scaled(data, 3.0), w).kappa == fit.kappa);
    CHECK(fit.lambda_hat.size() == 8);

    const auto flat = one_product({{{0.0, 5.0}, {2.0, 5.0}}});
    CHECK_THROWS_AS(estimate_kappa(flat, EstimationWindows::standard(flat.grid)), NumericalError);
}

TEST_CASE("mu_S and mu_R estimators") {
    const auto p = make_params(0.5, 10.0, 8.0, JumpLaw({0.05, 0.1}, {0.7, 0.3}), 8);
    const auto w = EstimationWindows::standard(p.grid);
    const auto data = synthesize_ticks(p, InitialPrices(8, 20.0), 600, kMonday, 25);
    const auto law = fit_jump_law(data);
    const auto ms = estimate_mu_sum(data, w, 0.5, law);
    double numerator = 0.0, squares = 0.0;
    for (std::size_t m = 0; m < 8; ++m) {
        numerator += ms.mean_increment[m] * ms.integral[m];
        squares += ms.integral[m] * ms.integral[m];
    }
    CHECK(ms.mu_sum * 2.0 * law.m2() * squares == doctest::Approx(numerator).epsilon(1e-10));
    CHECK(std::fabs(ms.mu_sum - 18.0) < 0.1 * 18.0);

    // Homogeneity: scaled prices with the law re-fitted on them.
    const auto big = scaled(data, 4.0);
    const auto ms_big = estimate_mu_sum(big, w, 0.5, fit_jump_law(big));
    CHECK(ms_big.mu_sum == doctest::Approx(ms.mu_sum).epsilon(1e-9));

    const auto flat = one_product({{{0.0, 5.0}, {2.0, 5.0}}});
    const auto zero = estimate_mu_sum(flat, EstimationWindows::standard(flat.grid), 0.5, JumpLaw::single(0.01));
    CHECK(zero.mu_sum == 0.0);
    CHECK_FALSE(zero.floored);

    const auto ratio = estimate_mu_ratio(data, w, 0.5);
    CHECK(std::fabs(ratio.mu_ratio - 8.0 / 18.0) < 0.1 * 8.0 / 18.0);
    for (const auto& pc : ratio.pairs) {
        CHECK(pc.l < pc.m);
        CHECK(std::fabs(pc.rho) <= 1.0);
    }

    const auto indep = make_params(0.5, 12.0, 0.0, JumpLaw::single(0.05), 8);
    const auto r0 = estimate_mu_ratio(synthesize_ticks(indep, InitialPrices(8, 20.0), 400, kMonday, 26), w, 0.5);
    CHECK(r0.mu_ratio < 0.05);
    const auto common = make_params(0.5, 0.0, 12.0, JumpLaw::single(0.05), 8);
    const auto r1 = estimate_mu_ratio(synthesize_ticks(common, InitialPrices(8, 20.0), 400, kMonday, 27), w, 0.5);
    CHECK(r1.mu_ratio > 0.9);

    auto tight = w;
    tight.min_overlap = 100.0;
    CHECK_THROWS_AS(estimate_mu_ratio(data, tight, 0.5), NumericalError);
}

TEST_CASE("end-to-end recovery of the German 2022 fixture") {
    const auto p = testing::de2022();
    const auto data = synthesize_ticks(p, InitialPrices(24, 100.0), 1000, kMonday, 28);
    const auto fit = estimate(data, EstimationWindows::standard(p.grid));
    CHECK(std::fabs(fit.params.kappa - 0.50) < 0.15 * 0.50);
    CHECK(std::fabs(fit.params.mu - 71.96) < 0.15 * 71.96);
    CHECK(std::fabs(fit.params.mu_c - 65.68) < 0.15 * 65.68);
    CHECK(total_variation(fit.params.jump_law, p.jump_law) < 0.01);
    CHECK(fit.sessions == 1000);
    CHECK(fit.correlations.size() == 24 * 23 / 2);
    const auto json = fitted_to_json(fit);
    CHECK(json.find("\"diagnostics\"") != std::string::npos);
    CHECK(params_from_json(json).mu == fit.params.mu);
}

TEST_CASE("estimation windows validation") {
    const auto g = MaturityGrid::hourly(2);
    auto w = EstimationWindows::standard(g);
    CHECK_NOTHROW(w.validate(g));
    w.end[1] = 11.0;
    CHECK_THROWS_AS(w.validate(g), InvalidInput);
    w = EstimationWindows::standard(g);
    w.begin[0] = w.end[0];
    CHECK_THROWS_AS(w.validate(g), InvalidInput);
    w = EstimationWindows::standard(g);
    w.delta = 0.0;
    CHECK_THROWS_AS(w.validate(g), InvalidInput);
}

TEST_CASE("weekly schedule and rolling estimation") {
    const auto p = make_params(0.5, 8.0, 6.0, JumpLaw::single(0.05), 6);
    const auto w = EstimationWindows::standard(p.grid);
    // Eight weeks of sessions starting on a Monday.
    const auto data = synthesize_ticks(p, InitialPrices(6, 20.0), 56, kMonday, 29);
    const auto schedule = weekly_schedule(data);
    REQUIRE(schedule.size() == 5);
    CHECK(schedule.front() == kMonday + std::chrono::days(28));
    for (Date d : schedule) CHECK(is_monday(d));
    CHECK(weekly_schedule(TickDataset{}).empty());
    std::vector<std::string> warnings;
    const auto rows = rolling_estimate(data, w, schedule, &warnings);
    CHECK(rows.size() == 5);
    CHECK(warnings.empty());
    CHECK(rolling_estimate(data, w, {}).empty());
    const auto none = rolling_estimate(data, w, {kMonday - std::chrono::days(70)}, &warnings);
    CHECK(none.empty());
    CHECK(warnings.size() == 1);

    // Constant parameters: every week sits in the noise band of mu + mu_c.
    for (const auto& row : rows) {
        CHECK(row.fit.sessions == 28);
        CHECK(std::fabs(row.fit.mu_sum - 14.0) < 0.25 * 14.0);
    }

    std::ostringstream csv;
    write_rolling_csv(rows, csv);
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line);
    std::getline(lines, line);
    CHECK(line == "week_start,kappa,mu,mu_c,sigma_proxy,rho_proxy");
    std::size_t n = 0;
    while (std::getline(lines, line)) ++n;
    CHECK(n == 5);

    const auto back = rolling_from_json(rolling_to_json(rows));
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].week_start == rows[i].week_start);
        CHECK(params_hash(back[i].fit.params) == params_hash(rows[i].fit.params));
    }
    CHECK_THROWS_AS(rolling_from_json(R"({"weeks":[{"week_start":"2022-02-07","params":{}}]})"), InvalidInput);
    auto reversed = rows;
    std::reverse(reversed.begin(), reversed.end());
    CHECK_THROWS_AS(rolling_from_json(rolling_to_json(reversed)), InvalidInput);
}

TEST_CASE("rolling estimates follow a mid-sample parameter step within four weeks") {
    const auto before = make_params(0.5, 6.0, 4.0, JumpLaw::single(0.05), 6);
    auto after = before;
    after.mu *= 2.0;
    after.mu_c *= 2.0;
    const Date change = kMonday + std::chrono::days(70);
    auto data = synthesize_ticks(before, InitialPrices(6, 20.0), 70, kMonday, 30);
    const auto tail = synthesize_ticks(after, InitialPrices(6, 20.0), 70, change, 31);
    data.sessions.insert(data.sessions.end(), tail.sessions.begin(), tail.sessions.end());
    const auto rows = rolling_estimate(data, EstimationWindows::standard(before.grid), weekly_schedule(data));
    for (const auto& row : rows) {
        const auto days = (row.week_start - change).count();
        if (days <= 0) CHECK(std::fabs(row.fit.mu_sum - 10.0) < std::fabs(row.fit.mu_sum - 20.0));
        if (days >= 28) CHECK(std::fabs(row.fit.mu_sum - 20.0) < std::fabs(row.fit.mu_sum - 10.0));
    }
}
