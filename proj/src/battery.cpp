#include "cshock/battery.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include "binio.hpp"
#include "cshock/errors.hpp"
#include "cshock/parallel.hpp"
#include "json.hpp"

namespace cshock {

std::size_t BatterySpec::levels() const {
    validate();
    return static_cast<std::size_t>(std::llround(capacity_mwh / power_mw));
}

void BatterySpec::validate() const {
    if (!(power_mw > 0.0) || !std::isfinite(power_mw)) throw InvalidInput("battery: power must be positive");
    if (!(capacity_mwh >= power_mw) || !std::isfinite(capacity_mwh))
        throw InvalidInput("battery: capacity must be at least one power step");
    const double ratio = capacity_mwh / power_mw;
    if (std::fabs(ratio - std::round(ratio)) > 1e-9) throw InvalidInput("battery: power must divide capacity");
    if (!(efficiency > 0.0) || !(efficiency <= 1.0)) throw InvalidInput("battery: efficiency must lie in (0, 1]");
    if (initial_stock_mwh != 0.0) throw InvalidInput("battery: the session starts with an empty battery");
}

ValueConfig value_config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        ValueConfig c;
        c.battery.capacity_mwh = j.at("capacity_mwh").get<double>();
        c.battery.power_mw = j.value("power_mw", 1.0);
        c.battery.efficiency = j.value("efficiency", 0.92);
        c.p = j.value("p", std::size_t{3});
        c.n_paths = j.value("n_paths", std::size_t{500000});
        c.seed = j.value("seed", std::uint64_t{0});
        c.battery.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("battery JSON: ") + e.what());
    }
}

ValueConfig load_value_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return value_config_from_json(ss.str());
}

DecisionSchedule DecisionSchedule::standard(const MaturityGrid& grid, std::size_t p, FeatureTiming timing) {
    grid.validate();
    if (p < 1 || p > kMaxFeatures) throw InvalidInput("p must lie in 1.." + std::to_string(kMaxFeatures));
    DecisionSchedule s;
    s.p = p;
    s.timing = timing;
    for (std::size_t m = 0; m < grid.size(); ++m) s.decision_times.push_back(grid.cutoff(m));
    return s;
}

std::size_t DecisionSchedule::features_at(std::size_t step) const {
    return std::min(p, steps() - 1 - step);
}

std::size_t DecisionSchedule::feature_time_index(std::size_t step) const {
    if (timing == FeatureTiming::AtDecision) return step;
    return std::min(step + 1, steps() - 1);
}

double cashflow(double c, double price, double efficiency) {
    if (c > 0.0) return -c / efficiency * price;
    if (c < 0.0) return -c * efficiency * price;
    return 0.0;
}

std::vector<int> admissible_controls(const BatterySpec& spec, std::size_t level) {
    const std::size_t n = spec.levels();
    if (level > n) throw InvalidInput("stock level above capacity");
    std::vector<int> out{0};
    if (level >= 1) out.push_back(-1);
    if (level + 1 <= n) out.push_back(1);
    return out;
}

namespace {

std::size_t feature_time(FeatureTiming timing, std::size_t step, std::size_t steps) {
    return timing == FeatureTiming::AtDecision ? step : std::min(step + 1, steps - 1);
}

std::size_t features_at(std::size_t p, std::size_t step, std::size_t steps) { return std::min(p, steps - 1 - step); }

}  // namespace

TrainingSet TrainingSet::simulate(const ModelParams& p, Generator generator, std::size_t n_paths, std::uint64_t seed,
                                  FeatureTiming timing) {
    p.validate();
    const std::size_t M = p.products();
    TrainingSet ts;
    ts.n_paths_ = n_paths;
    ts.steps_ = M;
    ts.timing_ = timing;
    ts.generator_ = generator;
    ts.params_hash_ = cshock::params_hash(p);
    ts.data_.assign(n_paths * M * kWidth, 0.0);
    std::vector<double> times;
    for (std::size_t m = 0; m < M; ++m) times.push_back(p.grid.cutoff(m));
    const InitialPrices zero(M, 0.0);
    ts.decision_times_ = times;
    SimConfig config{n_paths, seed, generator};
    simulate_batch(p, zero, times, config, [&](std::size_t path, const GridPath& g) {
        for (std::size_t i = 0; i < M; ++i) {
            double* r = ts.data_.data() + (path * M + i) * kWidth;
            r[0] = g.price(i, i);
            const std::size_t t = feature_time(timing, i, M);
            for (std::size_t q = 0; q < kMaxFeatures && i + 1 + q < M; ++q) r[1 + q] = g.price(i + 1 + q, t);
        }
    });
    return ts;
}

TrainingSet TrainingSet::from_paths(const std::vector<GridPath>& paths, const InitialPrices& f0, FeatureTiming timing) {
    TrainingSet ts;
    const std::size_t M = f0.size();
    ts.n_paths_ = paths.size();
    ts.steps_ = M;
    ts.timing_ = timing;
    ts.data_.assign(paths.size() * M * kWidth, 0.0);
    if (!paths.empty()) ts.decision_times_ = paths.front().times;
    for (std::size_t path = 0; path < paths.size(); ++path) {
        const GridPath& g = paths[path];
        if (g.products != M || g.times.size() != M)
            throw InvalidInput("training paths must hold every product at every decision time");
        for (std::size_t i = 0; i < M; ++i) {
            double* r = ts.data_.data() + (path * M + i) * kWidth;
            r[0] = g.price(i, i) - f0[i];
            const std::size_t t = feature_time(timing, i, M);
            for (std::size_t q = 0; q < kMaxFeatures && i + 1 + q < M; ++q)
                r[1 + q] = g.price(i + 1 + q, t) - f0[i + 1 + q];
        }
    }
    return ts;
}

int Policy::decide(std::size_t step, std::size_t level, const double* features, double price) const {
    const PolicyStep& ps = steps.at(step);
    int best_c = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (int c : admissible_controls(battery, level)) {
        const auto next = static_cast<std::size_t>(static_cast<long>(level) + c);
        const double v = cashflow(c * battery.power_mw, price, battery.efficiency) +
                         ps.continuation[next].predict(ps.mesh, features);
        if (v > best_v) {
            best_v = v;
            best_c = c;
        }
    }
    return best_c;
}

namespace {

constexpr std::uint32_t kPolicyVersion = 1;

}  // namespace

void Policy::write(std::ostream& out) const {
    if (decision_times.size() != f0.size() || steps.size() != f0.size())
        throw InvalidInput("policy: inconsistent step count");
    out.write("CSPL", 4);
    binio::put<std::uint32_t>(out, kPolicyVersion);
    binio::put(out, battery.capacity_mwh);
    binio::put(out, battery.power_mw);
    binio::put(out, battery.efficiency);
    binio::put(out, battery.initial_stock_mwh);
    binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(p));
    binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(timing));
    binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(generator));
    binio::put<std::uint64_t>(out, params_hash);
    binio::put(out, optimisation_value);
    binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(f0.size()));
    for (double v : f0) binio::put(out, v);
    for (double v : decision_times) binio::put(out, v);
    for (const auto& s : steps) {
        binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(s.features));
        s.mesh.write(out);
        binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(s.continuation.size()));
        for (const auto& m : s.continuation) m.write(out);
    }
}

Policy Policy::read(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::string(magic, 4) != "CSPL") throw InvalidInput("policy file: bad magic");
    const char* what = "policy file";
    const auto version = binio::get<std::uint32_t>(in, what);
    if (version != kPolicyVersion) throw InvalidInput("policy file: unsupported version " + std::to_string(version));
    Policy pol;
    pol.battery.capacity_mwh = binio::get<double>(in, what);
    pol.battery.power_mw = binio::get<double>(in, what);
    pol.battery.efficiency = binio::get<double>(in, what);
    pol.battery.initial_stock_mwh = binio::get<double>(in, what);
    pol.battery.validate();
    pol.p = binio::get<std::uint32_t>(in, what);
    const auto timing = binio::get<std::uint32_t>(in, what);
    const auto generator = binio::get<std::uint32_t>(in, what);
    if (timing > 1 || generator > 2) throw InvalidInput("policy file: bad header");
    pol.timing = static_cast<FeatureTiming>(timing);
    pol.generator = static_cast<Generator>(generator);
    pol.params_hash = binio::get<std::uint64_t>(in, what);
    pol.optimisation_value = binio::get<double>(in, what);
    const auto M = binio::get<std::uint32_t>(in, what);
    if (M == 0 || M > 1000) throw InvalidInput("policy file: implausible product count");
    pol.f0.resize(M);
    pol.decision_times.resize(M);
    for (auto& v : pol.f0) v = binio::get<double>(in, what);
    for (auto& v : pol.decision_times) v = binio::get<double>(in, what);
    const std::size_t levels = pol.battery.levels() + 1;
    for (std::uint32_t i = 0; i < M; ++i) {
        PolicyStep s;
        s.features = binio::get<std::uint32_t>(in, what);
        s.mesh = QuantileMesh::read(in);
        if (s.mesh.dims() != s.features) throw InvalidInput("policy file: mesh dimension mismatch");
        const auto n = binio::get<std::uint32_t>(in, what);
        if (n != levels) throw InvalidInput("policy file: stock level count mismatch");
        for (std::uint32_t k = 0; k < n; ++k) {
            s.continuation.push_back(LocalLinearModel::read(in, s.features));
            if (s.continuation.back().cells().size() != s.mesh.cells())
                throw InvalidInput("policy file: cell count mismatch");
        }
        pol.steps.push_back(std::move(s));
    }
    return pol;
}

void Policy::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    write(out);
    if (!out) throw IoError("write failed: " + path);
}

Policy Policy::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return read(in);
}

OptimizeResult optimize(const TrainingSet& training, const InitialPrices& f0, const BatterySpec& spec, std::size_t p) {
    spec.validate();
    if (p < 1 || p > kMaxFeatures) throw InvalidInput("p must lie in 1.." + std::to_string(kMaxFeatures));
    const std::size_t M = training.steps();
    if (f0.size() != M) throw InvalidInput("initial prices: wrong length");
    const std::size_t n = training.paths();
    if (n == 0) throw InvalidInput("optimize: no training paths");
    const std::size_t L = spec.levels() + 1;

    OptimizeResult result;
    const std::size_t floor = 100 * static_cast<std::size_t>(std::pow(4.0, static_cast<double>(std::min<std::size_t>(p, 4))));
    if (n < floor)
        result.warnings.push_back("n_paths " + std::to_string(n) + " is below the recommended " + std::to_string(floor) +
                                  " for p = " + std::to_string(p));

    Policy& pol = result.policy;
    pol.battery = spec;
    pol.p = p;
    pol.timing = training.timing();
    pol.generator = training.generator();
    pol.params_hash = training.params_hash();
    pol.f0 = f0;
    pol.decision_times = training.decision_times();
    pol.steps.resize(M);

    // gain[path * L + s]: realized gain from step i + 1 on with stock level s.
    std::vector<double> gain(n * L, 0.0), next_gain(n * L, 0.0);
    std::vector<double> target(n);
    std::vector<std::size_t> cell(n);
    for (std::size_t step = M; step-- > 0;) {
        const std::size_t d = features_at(p, step, M);
        FeatureMatrix x(n, d);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t q = 0; q < d; ++q) x.row(i)[q] = f0[step + 1 + q] + training.feature(i, step, q);
        PolicyStep& ps = pol.steps[step];
        ps.features = d;
        ps.mesh = QuantileMesh::build(x, standard_blocks(d));
        for (std::size_t i = 0; i < n; ++i) cell[i] = ps.mesh.cell_of(x.row(i));
        ps.continuation.resize(L);
        parallel_for(L, [&](std::size_t s) {
            std::vector<double> y(n);
            for (std::size_t i = 0; i < n; ++i) y[i] = gain[i * L + s];
            ps.continuation[s] = LocalLinearModel::fit(ps.mesh, x, y, cell);
        });
        parallel_for(n, [&](std::size_t i) {
            const double price = f0[step] + training.execution(i, step);
            for (std::size_t s = 0; s < L; ++s) {
                const int c = pol.decide(step, s, x.row(i), price);
                const auto next = static_cast<std::size_t>(static_cast<long>(s) + c);
                next_gain[i * L + s] = cashflow(c * spec.power_mw, price, spec.efficiency) + gain[i * L + next];
            }
        });
        std::swap(gain, next_gain);
    }
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double g = gain[i * L];
        const double delta = g - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (g - mean);
    }
    result.value = mean;
    const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    result.std_error = std::sqrt(var / static_cast<double>(n));
    pol.optimisation_value = result.value;
    return result;
}

OptimizeResult optimize(const ModelParams& params, const InitialPrices& f0, const BatterySpec& spec, std::size_t p,
                        Generator generator, std::size_t n_paths, std::uint64_t seed, FeatureTiming timing) {
    const TrainingSet ts = TrainingSet::simulate(params, generator, n_paths, seed, timing);
    return optimize(ts, f0, spec, p);
}

DecisionPrices decision_prices_from_grid(const GridPath& path) {
    if (path.times.size() != path.products) throw InvalidInput("decision prices: grid must be the decision times");
    DecisionPrices d;
    d.products = path.products;
    d.values.resize(path.products * path.products);
    for (std::size_t t = 0; t < path.products; ++t)
        for (std::size_t j = 0; j < path.products; ++j) d.values[t * d.products + j] = path.price(j, t);
    return d;
}

DecisionPrices decision_prices_from_ticks(const SessionTicks& session, const MaturityGrid& grid,
                                          std::span<const double> fallback, std::size_t* fallbacks) {
    const std::size_t M = grid.size();
    if (session.products.size() != M || fallback.size() != M)
        throw InvalidInput("decision prices: product count mismatch");
    DecisionPrices d;
    d.products = M;
    d.values.resize(M * M);
    std::size_t missing = 0;
    for (std::size_t j = 0; j < M; ++j) {
        const auto& ticks = session.products[j];
        std::size_t k = 0;
        for (std::size_t t = 0; t < M; ++t) {
            const double tau = grid.cutoff(t);
            while (k < ticks.size() && ticks[k].time <= tau + 1e-9) ++k;
            if (k == 0) {
                d.values[t * M + j] = fallback[j];
                ++missing;
            } else {
                d.values[t * M + j] = ticks[k - 1].price;
            }
        }
    }
    if (fallbacks) *fallbacks = missing;
    return d;
}

BacktestResult backtest(const Policy& policy, const DecisionPrices& observed) {
    const std::size_t M = policy.steps.size();
    if (observed.products != M) throw InvalidInput("backtest: product count mismatch");
    BacktestResult r;
    std::size_t level = 0;
    std::vector<double> x(kMaxFeatures);
    for (std::size_t step = 0; step < M; ++step) {
        const std::size_t d = policy.steps[step].features;
        const std::size_t t = feature_time(policy.timing, step, M);
        for (std::size_t q = 0; q < d; ++q) x[q] = observed.at(t, step + 1 + q);
        const double price = observed.at(step, step);
        const int c = policy.decide(step, level, x.data(), price);
        r.controls.push_back(c);
        level = static_cast<std::size_t>(static_cast<long>(level) + c);
    }
    r.gain = execute_controls(r.controls, observed, policy.battery);
    return r;
}

SpotResult spot_strategy(std::span<const double> spot, const BatterySpec& spec) {
    const std::size_t M = spot.size();
    const std::size_t L = spec.levels() + 1;
    std::vector<double> value((M + 1) * L, 0.0);
    std::vector<int> choice(M * L, 0);
    for (std::size_t i = M; i-- > 0;) {
        for (std::size_t s = 0; s < L; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            int best_c = 0;
            for (int c : admissible_controls(spec, s)) {
                const auto next = static_cast<std::size_t>(static_cast<long>(s) + c);
                const double v = cashflow(c * spec.power_mw, spot[i], spec.efficiency) + value[(i + 1) * L + next];
                if (v > best) {
                    best = v;
                    best_c = c;
                }
            }
            value[i * L + s] = best;
            choice[i * L + s] = best_c;
        }
    }
    SpotResult r;
    r.value = value[0];
    std::size_t s = 0;
    for (std::size_t i = 0; i < M; ++i) {
        const int c = choice[i * L + s];
        r.controls.push_back(c);
        s = static_cast<std::size_t>(static_cast<long>(s) + c);
    }
    return r;
}

double execute_controls(std::span<const int> controls, const DecisionPrices& observed, const BatterySpec& spec) {
    if (controls.size() != observed.products) throw InvalidInput("execute_controls: length mismatch");
    double gain = 0.0;
    for (std::size_t i = controls.size(); i-- > 0;)
        gain = cashflow(controls[i] * spec.power_mw, observed.at(i, i), spec.efficiency) + gain;
    return gain;
}

std::string strategy_name(Generator g) { return g == Generator::Diffusion ? "diffusion" : "poisson"; }

namespace {

int year_of(Date d) { return static_cast<int>(std::chrono::year_month_day(d).year()); }

void put_number(std::ostream& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, res.ptr - buf);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::vector<AnnualRow> ValuationReport::annual() const {
    std::set<std::tuple<Date, std::size_t, std::string>> seen;
    std::map<int, double> spot_sum;
    std::map<std::pair<int, std::size_t>, AnnualRow> rows;
    for (const auto& g : daily) {
        if (!seen.insert({g.date, g.p, g.strategy}).second)
            throw InvalidInput("duplicate daily gain for " + format_date(g.date) + ", p = " + std::to_string(g.p) +
                               ", strategy " + g.strategy);
        const int y = year_of(g.date);
        if (g.strategy == "spot") {
            spot_sum[y] += g.gain;
            continue;
        }
        if (g.strategy != "poisson" && g.strategy != "diffusion")
            throw InvalidInput("unknown strategy '" + g.strategy + "'");
        auto& row = rows[{y, g.p}];
        row.year = y;
        row.p = g.p;
        if (g.strategy == "poisson") {
            row.poisson += g.gain;
            row.has_poisson = true;
        } else {
            row.diffusion += g.gain;
            row.has_diffusion = true;
        }
    }
    std::vector<AnnualRow> out;
    std::set<int> years;
    for (const auto& [y, s] : spot_sum) years.insert(y);
    for (const auto& [key, r] : rows) years.insert(key.first);
    for (int y : years) {
        bool any = false;
        for (auto& [key, r] : rows) {
            if (key.first != y) continue;
            AnnualRow row = r;
            row.spot = spot_sum.count(y) ? spot_sum.at(y) : 0.0;
            out.push_back(row);
            any = true;
        }
        if (!any) out.push_back({y, 0, spot_sum.at(y), 0.0, 0.0, false, false});
    }
    return out;
}

void write_daily_gains_csv(const std::vector<DailyGain>& rows, std::ostream& out) {
    out << "# units: gain_eur=EUR per delivery day; p=0 marks the spot strategy\n";
    out << "delivery_date,p,strategy,gain_eur\n";
    for (const auto& r : rows) {
        out << format_date(r.date) << ',' << r.p << ',' << r.strategy << ',';
        put_number(out, r.gain);
        out << '\n';
    }
}

std::vector<DailyGain> read_daily_gains_csv(std::istream& in, const std::string& source) {
    std::vector<DailyGain> rows;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto view = trim(line);
        if (view.empty() || view.front() == '#') continue;
        auto fail = [&](const std::string& what) {
            return InvalidInput(source + ":" + std::to_string(lineno) + ": " + what);
        };
        std::vector<std::string_view> f;
        std::size_t pos = 0;
        while (true) {
            const auto comma = view.find(',', pos);
            f.push_back(trim(view.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        if (!header_seen) {
            header_seen = true;
            if (f.front() == "delivery_date") continue;
        }
        if (f.size() != 4) throw fail("expected 4 fields, got " + std::to_string(f.size()));
        DailyGain g;
        try {
            g.date = parse_date(f[0]);
        } catch (const InvalidInput& e) {
            throw fail(e.what());
        }
        auto r1 = std::from_chars(f[1].data(), f[1].data() + f[1].size(), g.p);
        if (r1.ec != std::errc{} || r1.ptr != f[1].data() + f[1].size()) throw fail("p must be a non-negative integer");
        g.strategy = std::string(f[2]);
        if (g.strategy != "spot" && g.strategy != "poisson" && g.strategy != "diffusion")
            throw fail("strategy must be spot, poisson or diffusion");
        auto r3 = std::from_chars(f[3].data(), f[3].data() + f[3].size(), g.gain);
        if (r3.ec != std::errc{} || r3.ptr != f[3].data() + f[3].size() || !std::isfinite(g.gain))
            throw fail("gain_eur must be a finite number");
        rows.push_back(g);
    }
    return rows;
}

void write_annual_csv(const std::vector<AnnualRow>& rows, std::ostream& out) {
    out << "# units: annual sums of daily gains, EUR\n";
    out << "year,p,spot,poisson,diffusion\n";
    for (const auto& r : rows) {
        out << r.year << ',' << r.p << ',';
        put_number(out, r.spot);
        out << ',';
        if (r.has_poisson) put_number(out, r.poisson);
        out << ',';
        if (r.has_diffusion) put_number(out, r.diffusion);
        out << '\n';
    }
}

std::string annual_to_json(const std::vector<AnnualRow>& rows) {
    nlohmann::json j;
    j["units"] = "EUR";
    auto& arr = j["rows"] = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json o{{"year", r.year}, {"p", r.p}, {"spot", r.spot}};
        o["poisson"] = r.has_poisson ? nlohmann::json(r.poisson) : nlohmann::json(nullptr);
        o["diffusion"] = r.has_diffusion ? nlohmann::json(r.diffusion) : nlohmann::json(nullptr);
        arr.push_back(std::move(o));
    }
    return j.dump(2);
}

ValuationReport backtest_policy(const Policy& policy, const TickDataset& data, const SpotTable& spot,
                                bool with_spot) {
    const std::size_t M = policy.steps.size();
    if (data.products() != M) throw InvalidInput("backtest: tick data and policy differ in product count");
    for (std::size_t m = 0; m < M; ++m)
        if (std::fabs(data.grid.cutoff(m) - policy.decision_times[m]) > 1e-9)
            throw InvalidInput("backtest: tick data grid does not match the policy's decision times");
    ValuationReport report;
    for (const auto& s : data.sessions) {
        const auto sp = spot.find(s.delivery_date);
        if (sp == spot.end()) {
            report.warnings.push_back(format_date(s.delivery_date) + ": no spot prices; day skipped");
            continue;
        }
        std::size_t missing = 0;
        const DecisionPrices observed = decision_prices_from_ticks(s, data.grid, sp->second, &missing);
        if (missing > 0)
            report.warnings.push_back(format_date(s.delivery_date) + ": " + std::to_string(missing) +
                                      " decision-time prices fell back to the day-ahead price");
        if (with_spot) {
            const SpotResult sr = spot_strategy(sp->second, policy.battery);
            report.daily.push_back(
                {s.delivery_date, 0, "spot", execute_controls(sr.controls, observed, policy.battery)});
        }
        report.daily.push_back(
            {s.delivery_date, policy.p, strategy_name(policy.generator), backtest(policy, observed).gain});
    }
    report.optimisation_values[{strategy_name(policy.generator), policy.p}] = policy.optimisation_value;
    return report;
}

ValuationReport backtest_campaign(const std::vector<CampaignDay>& days, const BatterySpec& spec,
                                  const CampaignConfig& config) {
    spec.validate();
    for (auto p : config.p_list)
        if (p < 1 || p > kMaxFeatures) throw InvalidInput("p must lie in 1.." + std::to_string(kMaxFeatures));
    ValuationReport report;
    struct CachedSet {
        std::uint64_t hash = 0;
        std::unique_ptr<TrainingSet> set;
    };
    std::map<Generator, CachedSet> training;
    using PolicyKey = std::tuple<std::uint64_t, std::vector<double>, int, std::size_t>;
    std::map<PolicyKey, Policy> policies;
    std::map<std::pair<std::string, std::size_t>, std::pair<double, std::size_t>> opt_values;

    for (const auto& day : days) {
        if (day.spot.size() != day.params.products() || day.observed.products != day.params.products())
            throw InvalidInput("campaign day " + format_date(day.date) + ": product count mismatch");
        if (config.spot) {
            const SpotResult sr = spot_strategy(day.spot, spec);
            report.daily.push_back({day.date, 0, "spot", execute_controls(sr.controls, day.observed, spec)});
        }
        const std::uint64_t hash = params_hash(day.params);
        for (Generator g : config.generators) {
            auto& cached = training[g];
            if (!cached.set || cached.hash != hash) {
                cached.set = std::make_unique<TrainingSet>(
                    TrainingSet::simulate(day.params, g, config.n_paths, config.seed, config.timing));
                cached.hash = hash;
            }
            for (std::size_t p : config.p_list) {
                PolicyKey key{hash, day.spot, static_cast<int>(g), p};
                auto it = policies.find(key);
                if (it == policies.end()) {
                    OptimizeResult r = optimize(*cached.set, day.spot, spec, p);
                    for (auto& w : r.warnings)
                        if (std::find(report.warnings.begin(), report.warnings.end(), w) == report.warnings.end())
                            report.warnings.push_back(w);
                    auto& acc = opt_values[{strategy_name(g), p}];
                    acc.first += r.value;
                    acc.second += 1;
                    it = policies.emplace(std::move(key), std::move(r.policy)).first;
                }
                report.daily.push_back({day.date, p, strategy_name(g), backtest(it->second, day.observed).gain});
            }
        }
    }
    for (const auto& [key, acc] : opt_values)
        report.optimisation_values[key] = acc.first / static_cast<double>(acc.second);
    return report;
}

ValuationReport backtest_campaign(const TickDataset& data, const std::vector<RollingRow>& weekly,
                                  const SpotTable& spot, const BatterySpec& spec, const CampaignConfig& config) {
    std::vector<CampaignDay> days;
    std::vector<std::string> warnings;
    for (const auto& s : data.sessions) {
        const auto sp = spot.find(s.delivery_date);
        if (sp == spot.end()) {
            warnings.push_back(format_date(s.delivery_date) + ": no spot prices; day skipped");
            continue;
        }
        const RollingRow* row = nullptr;
        for (const auto& r : weekly)
            if (r.week_start <= s.delivery_date && (!row || r.week_start > row->week_start)) row = &r;
        if (!row) {
            warnings.push_back(format_date(s.delivery_date) + ": no parameter estimate yet; day skipped");
            continue;
        }
        std::size_t missing = 0;
        CampaignDay day;
        day.date = s.delivery_date;
        day.params = row->fit.params;
        day.spot = sp->second;
        day.observed = decision_prices_from_ticks(s, data.grid, sp->second, &missing);
        if (missing > 0)
            warnings.push_back(format_date(s.delivery_date) + ": " + std::to_string(missing) +
                               " decision-time prices fell back to the day-ahead price");
        days.push_back(std::move(day));
    }
    ValuationReport report = backtest_campaign(days, spec, config);
    report.warnings.insert(report.warnings.begin(), warnings.begin(), warnings.end());
    return report;
}

}  // namespace cshock
