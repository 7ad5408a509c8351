#include "cshock/estimation.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "cshock/errors.hpp"
#include "cshock/parallel.hpp"
#include "cshock/rng.hpp"
#include "cshock/simulation.hpp"
#include "json.hpp"

namespace cshock {

namespace {

constexpr double kTimeTol = 1e-9;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

void put_number(std::ostream& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, res.ptr - buf);
}

// Orders each product's ticks by time and keeps the last record of every timestamp.
void normalize_session(SessionTicks& s) {
    for (auto& ticks : s.products) {
        std::stable_sort(ticks.begin(), ticks.end(), [](const Tick& a, const Tick& b) { return a.time < b.time; });
        std::vector<Tick> out;
        out.reserve(ticks.size());
        for (const auto& t : ticks) {
            if (!out.empty() && out.back().time == t.time)
                out.back() = t;
            else
                out.push_back(t);
        }
        ticks = std::move(out);
    }
}

std::size_t grid_index(double t, double delta) {
    return static_cast<std::size_t>(std::floor(t / delta + kTimeTol));
}

// LOCF prices at i * delta, i = 0..n; before the first tick the first price is used.
std::vector<double> locf_grid(const std::vector<Tick>& ticks, double origin, double delta, std::size_t n) {
    std::vector<double> out(n + 1, 0.0);
    if (ticks.empty()) return out;
    double level = ticks.front().price;
    std::size_t j = 0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = origin + static_cast<double>(i) * delta;
        for (; j < ticks.size() && ticks[j].time <= t + kTimeTol; ++j) level = ticks[j].price;
        out[i] = level;
    }
    return out;
}

double cross_sum(const std::vector<double>& a, const std::vector<double>& b, std::size_t i0, std::size_t i1) {
    double acc = 0.0;
    for (std::size_t i = i0 + 1; i <= i1; ++i) acc += (a[i] - a[i - 1]) * (b[i] - b[i - 1]);
    return acc;
}

void check_product(const TickDataset& data, std::size_t m) {
    if (m >= data.products()) throw InvalidInput("product index " + std::to_string(m) + " out of range");
}

void check_product(const SessionTicks& s, std::size_t m) {
    if (m >= s.products.size()) throw InvalidInput("product index " + std::to_string(m) + " out of range");
}

bool is_jump(const Tick& prev, const Tick& cur, double tick_size) {
    return std::fabs(cur.price - prev.price) >= 0.5 * tick_size;
}

}  // namespace

TickDataset read_ticks_csv(std::istream& in, const MaturityGrid& grid, const std::string& source) {
    grid.validate();
    std::map<Date, SessionTicks> sessions;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    auto fail = [&](const std::string& what) {
        return InvalidInput(source + ":" + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto view = trim(line);
        if (view.empty() || view.front() == '#') continue;
        const auto fields = split_csv(view);
        if (!header_seen) {
            header_seen = true;
            if (fields.front() == "delivery_date") {
                if (fields.size() != 4 || fields[1] != "product" || fields[2] != "timestamp_s" || fields[3] != "price")
                    throw fail("expected header delivery_date,product,timestamp_s,price");
                continue;
            }
        }
        if (fields.size() != 4) throw fail("expected 4 fields, got " + std::to_string(fields.size()));
        Date date;
        try {
            date = parse_date(fields[0]);
        } catch (const InvalidInput& e) {
            throw fail(e.what());
        }
        long product = 0;
        if (!parse_number(fields[1], product) || product < 1 || static_cast<std::size_t>(product) > grid.size())
            throw fail("product must be an integer in 1.." + std::to_string(grid.size()));
        double seconds = 0.0;
        if (!parse_number(fields[2], seconds) || !std::isfinite(seconds) || seconds < 0.0)
            throw fail("timestamp_s must be a finite number >= 0");
        double price = 0.0;
        if (!parse_number(fields[3], price) || !std::isfinite(price)) throw fail("price must be a finite number");
        const std::size_t m = static_cast<std::size_t>(product - 1);
        double hours = seconds / 3600.0;
        const double cutoff = grid.cutoff(m);
        if (hours > cutoff + kTimeTol) throw fail("timestamp after the trading cutoff of product " + std::to_string(product));
        hours = std::min(hours, cutoff);
        auto& s = sessions[date];
        if (s.products.empty()) {
            s.delivery_date = date;
            s.products.resize(grid.size());
        }
        s.products[m].push_back({hours, price});
    }
    TickDataset data;
    data.grid = grid;
    for (auto& [date, s] : sessions) {
        normalize_session(s);
        data.sessions.push_back(std::move(s));
    }
    return data;
}

TickDataset load_ticks_csv(const std::string& path, const MaturityGrid& grid) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_ticks_csv(in, grid, path);
}

void write_ticks_csv(const TickDataset& data, std::ostream& out) {
    out << "# units: timestamp_s=seconds since session open (15:00 on D-1), price=EUR/MWh\n";
    out << "delivery_date,product,timestamp_s,price\n";
    for (const auto& s : data.sessions) {
        const std::string date = format_date(s.delivery_date);
        for (std::size_t m = 0; m < s.products.size(); ++m) {
            for (const auto& t : s.products[m]) {
                out << date << ',' << (m + 1) << ',';
                put_number(out, t.time * 3600.0);
                out << ',';
                put_number(out, t.price);
                out << '\n';
            }
        }
    }
}

SpotTable read_spot_csv(std::istream& in, std::size_t products, const std::string& source) {
    SpotTable table;
    std::map<Date, std::vector<bool>> seen;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    auto fail = [&](const std::string& what) {
        return InvalidInput(source + ":" + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto view = trim(line);
        if (view.empty() || view.front() == '#') continue;
        const auto fields = split_csv(view);
        if (!header_seen) {
            header_seen = true;
            if (fields.front() == "delivery_date") continue;
        }
        if (fields.size() != 3) throw fail("expected 3 fields, got " + std::to_string(fields.size()));
        Date date;
        try {
            date = parse_date(fields[0]);
        } catch (const InvalidInput& e) {
            throw fail(e.what());
        }
        long product = 0;
        if (!parse_number(fields[1], product) || product < 1 || static_cast<std::size_t>(product) > products)
            throw fail("product must be an integer in 1.." + std::to_string(products));
        double price = 0.0;
        if (!parse_number(fields[2], price) || !std::isfinite(price)) throw fail("spot_price must be a finite number");
        auto& row = table[date];
        auto& flags = seen[date];
        if (row.empty()) {
            row.assign(products, 0.0);
            flags.assign(products, false);
        }
        const auto m = static_cast<std::size_t>(product - 1);
        if (flags[m]) throw fail("duplicate spot price for " + std::string(fields[0]) + " product " + std::string(fields[1]));
        flags[m] = true;
        row[m] = price;
    }
    for (const auto& [date, flags] : seen)
        if (std::find(flags.begin(), flags.end(), false) != flags.end())
            throw InvalidInput(source + ": incomplete spot prices for " + format_date(date));
    return table;
}

SpotTable load_spot_csv(const std::string& path, std::size_t products) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_spot_csv(in, products, path);
}

void write_spot_csv(const SpotTable& spot, std::ostream& out) {
    out << "# units: spot_price=EUR/MWh\n";
    out << "delivery_date,product,spot_price\n";
    for (const auto& [date, row] : spot) {
        const std::string d = format_date(date);
        for (std::size_t m = 0; m < row.size(); ++m) {
            out << d << ',' << (m + 1) << ',';
            put_number(out, row[m]);
            out << '\n';
        }
    }
}

TickDataset synthesize_ticks(const ModelParams& p, const InitialPrices& f0, std::size_t sessions, Date first_date,
                             std::uint64_t seed) {
    p.validate();
    TickDataset data;
    data.grid = p.grid;
    data.country = "synthetic";
    data.sessions.resize(sessions);
    parallel_for(sessions, [&](std::size_t d) {
        RandomStream rng = RandomStream::child(seed, d);
        const EventPath path = simulate_thinning(p, f0, rng);
        SessionTicks& s = data.sessions[d];
        s.delivery_date = first_date + std::chrono::days(static_cast<int>(d));
        s.products.resize(p.products());
        for (std::size_t m = 0; m < p.products(); ++m) {
            const double cutoff = p.grid.cutoff(m);
            auto& ticks = s.products[m];
            double level = f0[m];
            ticks.push_back({0.0, level});
            for (const auto& e : path.events[m]) {
                if (e.time > cutoff) break;
                level += e.size;
                if (e.time == ticks.back().time)
                    ticks.back().price = level;
                else
                    ticks.push_back({e.time, level});
            }
        }
    });
    return data;
}

std::pair<TickDataset, CleaningReport> clean(const TickDataset& raw, double multiplier) {
    if (raw.sessions.empty()) throw InvalidInput("clean: dataset has no sessions");
    if (!(multiplier > 0.0)) throw InvalidInput("clean: multiplier must be positive");
    const std::size_t M = raw.products();
    CleaningReport report;
    report.multiplier = multiplier;
    report.products.resize(M);
    TickDataset out;
    out.grid = raw.grid;
    out.tick_size = raw.tick_size;
    out.country = raw.country;
    out.sessions.resize(raw.sessions.size());
    for (std::size_t d = 0; d < raw.sessions.size(); ++d) {
        out.sessions[d].delivery_date = raw.sessions[d].delivery_date;
        out.sessions[d].products.resize(M);
    }
    parallel_for(M, [&](std::size_t m) {
        std::vector<double> returns;
        for (const auto& s : raw.sessions) {
            const auto& ticks = s.products[m];
            for (std::size_t i = 1; i < ticks.size(); ++i) returns.push_back(ticks[i].price - ticks[i - 1].price);
        }
        ProductCleaning& pc = report.products[m];
        const std::size_t n = returns.size();
        pc.total = n;
        double stdev = 0.0;
        if (n > 0) {
            const double mean = std::accumulate(returns.begin(), returns.end(), 0.0) / static_cast<double>(n);
            double ss = 0.0;
            for (double r : returns) ss += (r - mean) * (r - mean);
            stdev = std::sqrt(ss / static_cast<double>(n));
            // Equal returns leave only rounding noise, far below one tick.
            if (stdev < 1e-9 * raw.tick_size) stdev = 0.0;
        }
        pc.threshold = multiplier * stdev;
        for (std::size_t d = 0; d < raw.sessions.size(); ++d) {
            const auto& ticks = raw.sessions[d].products[m];
            auto& kept = out.sessions[d].products[m];
            if (stdev == 0.0) {
                kept = ticks;
                continue;
            }
            kept.reserve(ticks.size());
            for (std::size_t i = 0; i < ticks.size(); ++i) {
                if (i > 0 && std::fabs(ticks[i].price - kept.back().price) > pc.threshold) {
                    ++pc.removed;
                    continue;
                }
                kept.push_back(ticks[i]);
            }
        }
    });
    return {std::move(out), std::move(report)};
}

EstimationWindows EstimationWindows::standard(const MaturityGrid& grid, double delta, double min_overlap) {
    EstimationWindows w;
    w.delta = delta;
    w.min_overlap = min_overlap;
    for (std::size_t m = 0; m < grid.size(); ++m) {
        w.begin.push_back(0.0);
        w.end.push_back(grid.cutoff(m));
    }
    return w;
}

void EstimationWindows::validate(const MaturityGrid& grid) const {
    if (begin.size() != grid.size() || end.size() != grid.size())
        throw InvalidInput("estimation windows: need one window per product");
    if (!(delta > 0.0)) throw InvalidInput("estimation windows: delta must be positive");
    if (!(min_overlap >= 0.0)) throw InvalidInput("estimation windows: minimal overlap must be >= 0");
    for (std::size_t m = 0; m < grid.size(); ++m)
        if (!(begin[m] >= 0.0) || !(begin[m] < end[m]) || end[m] > grid.maturity(m) + kTimeTol)
            throw InvalidInput("estimation windows: need 0 <= T_b < T_e <= T_m for product " + std::to_string(m + 1));
}

double realized_covariation(const SessionTicks& session, std::size_t k, std::size_t l, double delta, double t_start,
                            double t_end) {
    check_product(session, k);
    check_product(session, l);
    if (!(delta > 0.0)) throw InvalidInput("realized_covariation: delta must be positive");
    if (!(t_end >= t_start)) throw InvalidInput("realized_covariation: need t_start <= t_end");
    const std::size_t n = grid_index(t_end - t_start, delta);
    const auto a = locf_grid(session.products[k], t_start, delta, n);
    if (k == l) return cross_sum(a, a, 0, n);
    return cross_sum(a, locf_grid(session.products[l], t_start, delta, n), 0, n);
}

double covariation_increment(const SessionTicks& session, std::size_t k, std::size_t l, double delta, double t_begin,
                             double t_end) {
    check_product(session, k);
    check_product(session, l);
    if (!(delta > 0.0)) throw InvalidInput("covariation_increment: delta must be positive");
    if (!(t_begin >= 0.0) || !(t_end >= t_begin)) throw InvalidInput("covariation_increment: need 0 <= t_begin <= t_end");
    const std::size_t i0 = grid_index(t_begin, delta);
    const std::size_t i1 = grid_index(t_end, delta);
    const auto a = locf_grid(session.products[k], 0.0, delta, i1);
    if (k == l) return cross_sum(a, a, i0, i1);
    return cross_sum(a, locf_grid(session.products[l], 0.0, delta, i1), i0, i1);
}

std::vector<SignaturePoint> signature_plot(const TickDataset& data, std::size_t m, const std::vector<double>& deltas) {
    check_product(data, m);
    std::vector<SignaturePoint> out;
    if (deltas.empty()) return out;
    if (data.sessions.empty()) throw InvalidInput("signature_plot: dataset has no sessions");
    const double horizon = data.grid.cutoff(m);
    for (double delta : deltas) {
        if (!(delta > 0.0)) throw InvalidInput("signature_plot: delta must be positive");
        std::vector<double> per(data.sessions.size());
        parallel_for(data.sessions.size(), [&](std::size_t d) {
            per[d] = covariation_increment(data.sessions[d], m, m, delta, 0.0, horizon);
        });
        const double mean = std::accumulate(per.begin(), per.end(), 0.0) / static_cast<double>(per.size());
        out.push_back({delta, mean / horizon});
    }
    return out;
}

std::optional<double> epps_correlation(const TickDataset& data, std::size_t l, std::size_t m, double delta,
                                       const EstimationWindows& windows) {
    check_product(data, l);
    check_product(data, m);
    windows.validate(data.grid);
    const double b = std::max(windows.begin[l], windows.begin[m]);
    const double e = std::min(windows.end[l], windows.end[m]);
    if (e - b < windows.min_overlap - kTimeTol)
        throw InvalidInput("epps_correlation: window overlap shorter than the minimal overlap");
    if (l == m) return 1.0;
    std::vector<std::array<double, 3>> per(data.sessions.size());
    parallel_for(data.sessions.size(), [&](std::size_t d) {
        const auto& s = data.sessions[d];
        per[d] = {covariation_increment(s, l, m, delta, b, e), covariation_increment(s, l, l, delta, b, e),
                  covariation_increment(s, m, m, delta, b, e)};
    });
    double cross = 0.0, vl = 0.0, vm = 0.0;
    for (const auto& v : per) {
        cross += v[0];
        vl += v[1];
        vm += v[2];
    }
    if (!(vl > 0.0) || !(vm > 0.0)) return std::nullopt;
    return cross / std::sqrt(vl * vm);
}

JumpLaw fit_jump_law(const TickDataset& data) {
    std::map<long long, std::size_t> counts;
    std::size_t total = 0;
    for (const auto& s : data.sessions) {
        for (const auto& ticks : s.products) {
            for (std::size_t i = 1; i < ticks.size(); ++i) {
                const long long k = std::llround(std::fabs(ticks[i].price - ticks[i - 1].price) / data.tick_size);
                if (k == 0) continue;
                ++counts[k];
                ++total;
            }
        }
    }
    if (total == 0) throw InvalidInput("fit_jump_law: no nonzero returns in the data");
    std::vector<double> sizes, probs;
    for (const auto& [k, c] : counts) {
        sizes.push_back(static_cast<double>(k) * data.tick_size);
        probs.push_back(static_cast<double>(c) / static_cast<double>(total));
    }
    return JumpLaw(std::move(sizes), std::move(probs));
}

KappaContrast::KappaContrast(const TickDataset& data, const EstimationWindows& windows)
    : begin_(windows.begin), end_(windows.end), maturity_(data.grid.maturities), sessions_(data.sessions.size()) {
    windows.validate(data.grid);
    if (sessions_ == 0) throw InvalidInput("kappa contrast: dataset has no sessions");
    const std::size_t M = data.products();
    lead_.resize(M);
    counts_.assign(M, 0);
    parallel_for(M, [&](std::size_t m) {
        for (const auto& s : data.sessions) {
            const auto& ticks = s.products[m];
            for (std::size_t i = 1; i < ticks.size(); ++i) {
                const double t = ticks[i].time;
                if (t <= begin_[m] || t > end_[m]) continue;
                if (!is_jump(ticks[i - 1], ticks[i], data.tick_size)) continue;
                lead_[m].push_back(maturity_[m] - t);
            }
        }
        counts_[m] = lead_[m].size();
    });
    total_jumps_ = std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
}

double KappaContrast::product_term(std::size_t m, double kappa) const {
    const std::size_t n = counts_.at(m);
    if (n == 0) return 0.0;
    const double D = static_cast<double>(sessions_);
    const double per_session = static_cast<double>(n) / D;  // (T_e - T_b) * Lambda_hat
    const double i1 = exp_integral(kappa, maturity_[m], begin_[m], end_[m]);
    const double i2 = exp_integral(2.0 * kappa, maturity_[m], begin_[m], end_[m]);
    double weighted = 0.0;
    for (double lead : lead_[m]) weighted += std::exp(-kappa * lead);
    return -2.0 * per_session * (weighted / D) / i1 + per_session * per_session * i2 / (i1 * i1);
}

double KappaContrast::operator()(double kappa) const {
    std::vector<double> terms(counts_.size());
    parallel_for(terms.size(), [&](std::size_t m) { terms[m] = product_term(m, kappa); });
    return std::accumulate(terms.begin(), terms.end(), 0.0);
}

KappaFit estimate_kappa(const TickDataset& data, const EstimationWindows& windows, double kappa_max) {
    if (!(kappa_max > 0.0)) throw InvalidInput("estimate_kappa: kappa_max must be positive");
    const KappaContrast contrast(data, windows);
    if (!contrast.identifiable()) throw NumericalError("cannot identify kappa: no jumps in any estimation window");

    const double step = 0.05;
    const auto n_grid = static_cast<std::size_t>(std::floor(kappa_max / step + 1e-9));
    double best_k = 0.0;
    double best_v = contrast(0.0);
    for (std::size_t i = 1; i <= n_grid; ++i) {
        const double k = std::min(kappa_max, static_cast<double>(i) * step);
        const double v = contrast(k);
        if (v < best_v) {
            best_v = v;
            best_k = k;
        }
    }
    double lo = std::max(0.0, best_k - step);
    double hi = std::min(kappa_max, best_k + step);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = contrast(x1);
    double f2 = contrast(x2);
    while (hi - lo > 1e-4) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = contrast(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = contrast(x2);
        }
    }
    const double mid = 0.5 * (lo + hi);
    const double f_mid = contrast(mid);
    KappaFit fit;
    if (f_mid < best_v) {
        fit.kappa = mid;
        fit.contrast = f_mid;
    } else {
        fit.kappa = best_k;
        fit.contrast = best_v;
    }
    const std::size_t M = data.products();
    fit.jumps = contrast.jumps();
    fit.lambda_hat.resize(M);
    for (std::size_t m = 0; m < M; ++m)
        fit.lambda_hat[m] = static_cast<double>(fit.jumps[m]) /
                            (static_cast<double>(data.sessions.size()) * (windows.end[m] - windows.begin[m]));
    return fit;
}

MuSumFit estimate_mu_sum(const TickDataset& data, const EstimationWindows& windows, double kappa,
                         const JumpLaw& law) {
    windows.validate(data.grid);
    if (data.sessions.empty()) throw InvalidInput("estimate_mu_sum: dataset has no sessions");
    if (law.empty()) throw InvalidInput("estimate_mu_sum: empty jump law");
    const std::size_t M = data.products();
    const double delta = windows.delta;
    std::vector<std::vector<double>> per(data.sessions.size(), std::vector<double>(M));
    parallel_for(data.sessions.size(), [&](std::size_t d) {
        const auto& s = data.sessions[d];
        for (std::size_t m = 0; m < M; ++m) {
            const std::size_t i0 = grid_index(windows.begin[m], delta);
            const std::size_t i1 = grid_index(windows.end[m], delta);
            const auto g = locf_grid(s.products[m], 0.0, delta, i1);
            per[d][m] = cross_sum(g, g, i0, i1);
        }
    });
    MuSumFit fit;
    fit.mean_increment.assign(M, 0.0);
    fit.integral.resize(M);
    fit.residual.resize(M);
    const double D = static_cast<double>(data.sessions.size());
    for (const auto& row : per)
        for (std::size_t m = 0; m < M; ++m) fit.mean_increment[m] += row[m];
    double num = 0.0, den = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
        fit.mean_increment[m] /= D;
        const double a = static_cast<double>(grid_index(windows.begin[m], delta)) * delta;
        const double b = static_cast<double>(grid_index(windows.end[m], delta)) * delta;
        fit.integral[m] = exp_integral(kappa, data.grid.maturity(m), a, b);
        num += fit.mean_increment[m] * fit.integral[m];
        den += fit.integral[m] * fit.integral[m];
    }
    den *= 2.0 * law.m2();
    if (!(den > 0.0)) throw NumericalError("estimate_mu_sum: degenerate windows (zero integrals)");
    fit.mu_sum = num / den;
    if (fit.mu_sum < 0.0) {
        fit.mu_sum = 0.0;
        fit.floored = true;
    }
    for (std::size_t m = 0; m < M; ++m)
        fit.residual[m] = fit.mean_increment[m] - 2.0 * fit.mu_sum * law.m2() * fit.integral[m];
    return fit;
}

MuRatioFit estimate_mu_ratio(const TickDataset& data, const EstimationWindows& windows, double kappa) {
    windows.validate(data.grid);
    if (data.sessions.empty()) throw InvalidInput("estimate_mu_ratio: dataset has no sessions");
    const std::size_t M = data.products();
    const double delta = windows.delta;
    struct Pair {
        std::size_t l, m, i0, i1;
    };
    std::vector<Pair> pairs;
    std::size_t n_max = 0;
    for (std::size_t l = 0; l < M; ++l) {
        for (std::size_t m = l + 1; m < M; ++m) {
            const double b = std::max(windows.begin[l], windows.begin[m]);
            const double e = std::min(windows.end[l], windows.end[m]);
            if (e - b < windows.min_overlap - kTimeTol) continue;
            pairs.push_back({l, m, grid_index(b, delta), grid_index(e, delta)});
            n_max = std::max(n_max, pairs.back().i1);
        }
    }
    if (pairs.empty()) throw NumericalError("estimate_mu_ratio: no product pair with sufficient window overlap");

    std::vector<std::vector<std::array<double, 3>>> per(data.sessions.size());
    parallel_for(data.sessions.size(), [&](std::size_t d) {
        const auto& s = data.sessions[d];
        std::vector<std::vector<double>> g(M);
        for (std::size_t m = 0; m < M; ++m) g[m] = locf_grid(s.products[m], 0.0, delta, n_max);
        per[d].resize(pairs.size());
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            const auto& p = pairs[k];
            per[d][k] = {cross_sum(g[p.l], g[p.m], p.i0, p.i1), cross_sum(g[p.l], g[p.l], p.i0, p.i1),
                         cross_sum(g[p.m], g[p.m], p.i0, p.i1)};
        }
    });

    MuRatioFit fit;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        double cross = 0.0, vl = 0.0, vm = 0.0;
        for (const auto& row : per) {
            cross += row[k][0];
            vl += row[k][1];
            vm += row[k][2];
        }
        if (!(vl > 0.0) || !(vm > 0.0)) continue;
        const double rho = cross / std::sqrt(vl * vm);
        const double gap = std::fabs(data.grid.maturity(pairs[k].l) - data.grid.maturity(pairs[k].m));
        fit.pairs.push_back({pairs[k].l, pairs[k].m, rho});
        num += rho * std::exp(-0.5 * kappa * gap);
        den += std::exp(-kappa * gap);
    }
    if (fit.pairs.empty()) throw NumericalError("estimate_mu_ratio: every pair has a zero realized variance");
    fit.raw_ratio = num / den;
    fit.mu_ratio = std::clamp(fit.raw_ratio, 0.0, 1.0);
    return fit;
}

FittedParams estimate(const TickDataset& data, const EstimationWindows& windows, bool clean_first,
                      double kappa_max) {
    if (data.sessions.empty()) throw InvalidInput("estimate: dataset has no sessions");
    windows.validate(data.grid);
    FittedParams fit;
    TickDataset cleaned;
    const TickDataset* use = &data;
    if (clean_first) {
        auto [c, report] = clean(data);
        cleaned = std::move(c);
        fit.cleaning = std::move(report);
        use = &cleaned;
        for (std::size_t m = 0; m < fit.cleaning.products.size(); ++m)
            if (fit.cleaning.products[m].removed_fraction() > 0.01)
                fit.warnings.push_back("cleaning removed more than 1% of the returns of product " + std::to_string(m + 1));
    }
    const JumpLaw law = fit_jump_law(*use);
    const KappaFit kf = estimate_kappa(*use, windows, kappa_max);
    const MuSumFit ms = estimate_mu_sum(*use, windows, kf.kappa, law);
    if (ms.floored) fit.warnings.push_back("mu_S numerator negative; floored at 0");
    if (!(ms.mu_sum > 0.0)) throw NumericalError("estimate: mu + mu_c estimate is zero");
    const MuRatioFit mr = estimate_mu_ratio(*use, windows, kf.kappa);
    if (mr.raw_ratio < 0.0) fit.warnings.push_back("mu_R raw ratio negative; clipped to 0");
    if (mr.raw_ratio > 1.0) fit.warnings.push_back("mu_R raw ratio above 1; clipped to 1");

    fit.params.kappa = kf.kappa;
    fit.params.mu_c = ms.mu_sum * mr.mu_ratio;
    fit.params.mu = ms.mu_sum - fit.params.mu_c;
    fit.params.grid = data.grid;
    fit.params.jump_law = law;
    fit.sessions = use->sessions.size();
    fit.contrast = kf.contrast;
    fit.lambda_hat = kf.lambda_hat;
    fit.mu_sum_residuals = ms.residual;
    fit.correlations = mr.pairs;
    fit.mu_sum = ms.mu_sum;
    fit.mu_ratio = mr.mu_ratio;
    return fit;
}

std::string fitted_to_json(const FittedParams& fit) {
    nlohmann::json j = nlohmann::json::parse(params_to_json(fit.params));
    nlohmann::json diag;
    diag["sessions"] = fit.sessions;
    diag["kappa_contrast"] = fit.contrast;
    diag["lambda_hat"] = fit.lambda_hat;
    diag["mu_sum"] = fit.mu_sum;
    diag["mu_ratio"] = fit.mu_ratio;
    diag["mu_sum_residuals"] = fit.mu_sum_residuals;
    diag["m1"] = fit.params.jump_law.m1();
    diag["m2"] = fit.params.jump_law.m2();
    auto& corr = diag["correlations"] = nlohmann::json::array();
    for (const auto& p : fit.correlations) corr.push_back({{"l", p.l + 1}, {"m", p.m + 1}, {"rho", p.rho}});
    auto& cl = diag["cleaning"] = nlohmann::json::array();
    for (std::size_t m = 0; m < fit.cleaning.products.size(); ++m) {
        const auto& pc = fit.cleaning.products[m];
        cl.push_back({{"product", m + 1}, {"removed", pc.removed}, {"total", pc.total}, {"threshold", pc.threshold}});
    }
    diag["warnings"] = fit.warnings;
    diag["units"] = {{"lambda_hat", "jumps/hour"}, {"mu_sum_residuals", "EUR^2/MWh^2"}, {"m2", "EUR^2/MWh^2"}};
    j["diagnostics"] = std::move(diag);
    return j.dump(2);
}

std::vector<Date> weekly_schedule(const TickDataset& data, int lookback_days) {
    std::vector<Date> out;
    if (data.sessions.empty()) return out;
    const Date first = data.sessions.front().delivery_date;
    const Date last = data.sessions.back().delivery_date;
    Date t = first + std::chrono::days(lookback_days);
    while (!is_monday(t)) t += std::chrono::days(1);
    for (; t <= last + std::chrono::days(1); t += std::chrono::days(7)) out.push_back(t);
    return out;
}

std::vector<RollingRow> rolling_estimate(const TickDataset& data, const EstimationWindows& windows,
                                         const std::vector<Date>& schedule, std::vector<std::string>* warnings,
                                         int lookback_days) {
    std::vector<RollingRow> rows;
    for (const Date t : schedule) {
        TickDataset window;
        window.grid = data.grid;
        window.tick_size = data.tick_size;
        window.country = data.country;
        const Date from = t - std::chrono::days(lookback_days);
        for (const auto& s : data.sessions)
            if (s.delivery_date >= from && s.delivery_date < t) window.sessions.push_back(s);
        if (window.sessions.empty()) {
            if (warnings) warnings->push_back(format_date(t) + ": no sessions in the estimation window");
            continue;
        }
        try {
            rows.push_back({t, estimate(window, windows, true)});
        } catch (const NumericalError& e) {
            if (warnings) warnings->push_back(format_date(t) + ": " + e.what());
        }
    }
    return rows;
}

void write_rolling_csv(const std::vector<RollingRow>& rows, std::ostream& out) {
    out << "# units: kappa,mu,mu_c=1/hour, sigma_proxy=EUR/MWh/sqrt(hour), rho_proxy=dimensionless\n";
    out << "week_start,kappa,mu,mu_c,sigma_proxy,rho_proxy\n";
    for (const auto& row : rows) {
        const auto& p = row.fit.params;
        out << format_date(row.week_start) << ',';
        put_number(out, p.kappa);
        out << ',';
        put_number(out, p.mu);
        out << ',';
        put_number(out, p.mu_c);
        out << ',';
        if (p.kappa > 0.0)
            put_number(out, volatility_proxy(p));
        else
            out << "nan";
        out << ',';
        put_number(out, correlation_proxy(p, 1.0));
        out << '\n';
    }
}

std::string rolling_to_json(const std::vector<RollingRow>& rows) {
    nlohmann::json j;
    auto& weeks = j["weeks"] = nlohmann::json::array();
    for (const auto& row : rows)
        weeks.push_back({{"week_start", format_date(row.week_start)},
                         {"params", nlohmann::json::parse(params_to_json(row.fit.params))}});
    return j.dump(2);
}

std::vector<RollingRow> rolling_from_json(const std::string& text) {
    std::vector<RollingRow> rows;
    try {
        const auto j = nlohmann::json::parse(text);
        for (const auto& w : j.at("weeks")) {
            RollingRow row;
            row.week_start = parse_date(w.at("week_start").get<std::string>());
            row.fit.params = params_from_json(w.at("params").dump());
            if (!rows.empty() && row.week_start <= rows.back().week_start)
                throw InvalidInput("rolling estimates: week_start must be strictly increasing");
            rows.push_back(std::move(row));
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("rolling estimates JSON: ") + e.what());
    }
    return rows;
}

std::vector<RollingRow> load_rolling_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return rolling_from_json(ss.str());
}

}  // namespace cshock
