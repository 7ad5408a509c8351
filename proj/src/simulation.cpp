#include "cshock/simulation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <istream>
#include <optional>
#include <ostream>

#include "binio.hpp"
#include "cshock/errors.hpp"
#include "cshock/parallel.hpp"
#include "cshock/rng.hpp"

namespace cshock {

const char* generator_name(Generator g) {
    switch (g) {
        case Generator::Thinning: return "thinning";
        case Generator::Decomposition: return "decomposition";
        case Generator::Diffusion: return "diffusion";
    }
    return "unknown";
}

Generator parse_generator(const std::string& name) {
    if (name == "thinning") return Generator::Thinning;
    if (name == "decomposition") return Generator::Decomposition;
    if (name == "diffusion") return Generator::Diffusion;
    throw InvalidInput("unknown generator '" + name + "' (expected thinning, decomposition or diffusion)");
}

std::vector<Event> sample_inhomogeneous_cpp(const RateSpec& rate, const JumpLaw& law, RandomStream& rng,
                                            double sign, std::int64_t origin) {
    if (!(rate.scale >= 0.0) || !(rate.kappa >= 0.0)) throw InvalidInput("rate spec: scale and kappa must be >= 0");
    const double a = rate.window_start;
    const double b = rate.window_end;
    std::vector<Event> out;
    if (rate.scale == 0.0 || !(b > a)) return out;
    const double total = rate.scale * exp_integral(rate.kappa, rate.anchor, a, b);
    const std::uint64_t n = rng.poisson(total);
    if (n == 0) return out;
    out.resize(n);
    const bool flat = rate.kappa * (b - a) < 1e-8;
    // Lambda(t) = scale * exp(-kappa (T - a)) * (exp(kappa (t - a)) - 1) / kappa
    const double head = rate.scale * std::exp(-rate.kappa * (rate.anchor - a));
    for (auto& e : out) {
        const double u = rng.uniform() * total;
        double t = flat ? a + u / rate.scale : a + std::log1p(rate.kappa * u / head) / rate.kappa;
        e.time = std::min(t, b);
        e.origin = origin;
    }
    std::sort(out.begin(), out.end(), [](const Event& x, const Event& y) { return x.time < y.time; });
    for (auto& e : out) e.size = sign * law.sample(rng);
    return out;
}

std::vector<Event> sample_inhomogeneous_cpp(const RateSpec& rate, const JumpLaw& law, std::uint64_t seed) {
    RandomStream rng(seed, 0);
    return sample_inhomogeneous_cpp(rate, law, rng);
}

namespace {

void check_f0(const ModelParams& p, const InitialPrices& f0) {
    if (f0.size() != p.products())
        throw InvalidInput("initial prices: expected " + std::to_string(p.products()) + " values, got " +
                           std::to_string(f0.size()));
}

void add_idiosyncratic(const ModelParams& p, EventPath& path, RandomStream& rng) {
    if (p.mu == 0.0) return;
    for (std::size_t m = 0; m < p.products(); ++m) {
        const double tm = p.grid.maturities[m];
        const RateSpec rate{p.mu, p.kappa, tm, 0.0, tm};
        for (double sign : {1.0, -1.0}) {
            auto events = sample_inhomogeneous_cpp(rate, p.jump_law, rng, sign);
            path.events[m].insert(path.events[m].end(), events.begin(), events.end());
        }
    }
}

void sort_events(EventPath& path) {
    for (auto& ev : path.events)
        std::stable_sort(ev.begin(), ev.end(), [](const Event& x, const Event& y) { return x.time < y.time; });
}

}  // namespace

EventPath simulate_thinning(const ModelParams& p, const InitialPrices& f0, RandomStream& rng) {
    p.validate();
    check_f0(p, f0);
    const std::size_t M = p.products();
    const auto& T = p.grid.maturities;
    EventPath path;
    path.f0 = f0;
    path.events.resize(M);
    add_idiosyncratic(p, path, rng);
    if (p.mu_c > 0.0) {
        // Both signs at once: the two measures are independent with equal
        // intensity, so their superposition has twice the rate and a fair sign.
        const double horizon = T.back();
        const std::uint64_t n = rng.poisson(2.0 * horizon * p.mu_c);
        std::int64_t shock_id = 0;
        for (std::uint64_t k = 0; k < n; ++k) {
            const double s = horizon * rng.uniform();
            const double x = p.mu_c * rng.uniform();
            const double sign = rng.coin() ? 1.0 : -1.0;
            const double size = sign * p.jump_law.sample(rng);
            bool hit = false;
            auto first = std::lower_bound(T.begin(), T.end(), s);
            for (std::size_t m = static_cast<std::size_t>(first - T.begin()); m < M; ++m) {
                if (x > p.mu_c * std::exp(-p.kappa * (T[m] - s))) break;
                path.events[m].push_back({s, size, shock_id});
                hit = true;
            }
            if (hit) ++shock_id;
        }
    }
    sort_events(path);
    return path;
}

EventPath simulate_thinning(const ModelParams& p, const InitialPrices& f0, std::uint64_t seed) {
    RandomStream rng(seed, 0);
    return simulate_thinning(p, f0, rng);
}

EventPath simulate_decomposition(const ModelParams& p, const InitialPrices& f0, RandomStream& rng) {
    p.validate();
    check_f0(p, f0);
    if (p.mu_c > 0.0 && p.kappa == 0.0)
        throw InvalidInput("decomposition needs kappa > 0 when mu_c > 0; use the thinning generator");
    if (p.mu == 0.0 || p.mu_c == 0.0) return simulate_thinning(p, f0, rng);
    const std::size_t M = p.products();
    const auto& T = p.grid.maturities;
    EventPath path;
    path.f0 = f0;
    path.events.resize(M);
    add_idiosyncratic(p, path, rng);
    // Layer j fires with rate mu_c (exp(-kappa (T_j - s)) - exp(-kappa (T_{j+1} - s))) for s <= T_j
    // (the last layer with mu_c exp(-kappa (T_M - s))) and hits every live product i <= j.
    // Summing layers j >= i telescopes to product i's common intensity.
    std::int64_t shock_id = 0;
    for (std::size_t j = 0; j < M; ++j) {
        const double scale = j + 1 < M ? -p.mu_c * std::expm1(-p.kappa * (T[j + 1] - T[j])) : p.mu_c;
        const RateSpec rate{scale, p.kappa, T[j], 0.0, T[j]};
        for (double sign : {1.0, -1.0}) {
            const auto shocks = sample_inhomogeneous_cpp(rate, p.jump_law, rng, sign);
            for (const auto& e : shocks) {
                auto first = std::lower_bound(T.begin(), T.end(), e.time);
                for (std::size_t i = static_cast<std::size_t>(first - T.begin()); i <= j; ++i)
                    path.events[i].push_back({e.time, e.size, shock_id});
                ++shock_id;
            }
        }
    }
    sort_events(path);
    return path;
}

EventPath simulate_decomposition(const ModelParams& p, const InitialPrices& f0, std::uint64_t seed) {
    RandomStream rng(seed, 0);
    return simulate_decomposition(p, f0, rng);
}

namespace {

void check_grid_times(const std::vector<double>& times) {
    for (std::size_t g = 0; g < times.size(); ++g) {
        if (!(times[g] >= 0.0) || !std::isfinite(times[g])) throw InvalidInput("grid times must be finite and >= 0");
        if (g > 0 && times[g] < times[g - 1]) throw InvalidInput("grid times must be non-decreasing");
    }
}

}  // namespace

DiffusionGenerator::DiffusionGenerator(const ModelParams& p, std::vector<double> grid_times)
    : m_(p.products()), times_(std::move(grid_times)) {
    p.validate();
    check_grid_times(times_);
    const auto& T = p.grid.maturities;
    const std::size_t M = m_;

    Eigen::MatrixXd R(M, M);
    const double common = p.mu_c / (p.mu + p.mu_c);
    for (std::size_t k = 0; k < M; ++k)
        for (std::size_t l = 0; l < M; ++l)
            R(k, l) = k == l ? 1.0 : common * std::exp(-0.5 * p.kappa * std::fabs(T[k] - T[l]));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(R);
    min_eigenvalue_ = full.eigenvalues().minCoeff();
    if (min_eigenvalue_ < -1e-10)
        throw NumericalError("diffusion correlation matrix is not positive semidefinite: eigenvalue " +
                             std::to_string(min_eigenvalue_));

    // Factor of each trailing block R[f:, f:] as V sqrt(max(lambda, 0)); this
    // absorbs the permitted jitter and handles rank-deficient blocks.
    chol_.resize(M);
    for (std::size_t f = 0; f < M; ++f) {
        const auto n = static_cast<Eigen::Index>(M - f);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R.bottomRightCorner(n, n));
        Eigen::MatrixXd factor = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
        auto& packed = chol_[f];
        packed.resize(static_cast<std::size_t>(n * n));
        for (Eigen::Index r = 0; r < n; ++r)
            for (Eigen::Index c = 0; c < n; ++c) packed[static_cast<std::size_t>(r * n + c)] = factor(r, c);
    }

    const double var_scale = 2.0 * p.jump_law.m2() * (p.mu + p.mu_c);
    std::vector<double> cutoffs(M);
    for (std::size_t m = 0; m < M; ++m) cutoffs[m] = p.grid.cutoff(m);
    double prev = 0.0;
    for (std::size_t g = 0; g < times_.size(); ++g) {
        const double end = times_[g];
        std::vector<double> breaks{prev};
        for (double c : cutoffs)
            if (c > prev && c < end) breaks.push_back(c);
        breaks.push_back(end);
        for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
            const double lo = breaks[b];
            const double hi = breaks[b + 1];
            if (!(hi > lo)) continue;
            const auto first = static_cast<std::size_t>(std::lower_bound(cutoffs.begin(), cutoffs.end(), hi) -
                                                        cutoffs.begin());
            if (first >= M) continue;
            Segment seg{g, first, {}};
            for (std::size_t k = first; k < M; ++k)
                seg.stdev.push_back(std::sqrt(var_scale * exp_integral(p.kappa, T[k], lo, hi)));
            segments_.push_back(std::move(seg));
        }
        prev = std::max(prev, end);
    }
}

GridPath DiffusionGenerator::simulate(const InitialPrices& f0, RandomStream& rng) const {
    if (f0.size() != m_) throw InvalidInput("initial prices: wrong length");
    const std::size_t G = times_.size();
    GridPath out;
    out.times = times_;
    out.products = m_;
    out.prices.resize(m_ * G);
    std::vector<double> x(f0.begin(), f0.end());
    std::vector<double> z(m_);
    std::size_t s = 0;
    for (std::size_t g = 0; g < G; ++g) {
        for (; s < segments_.size() && segments_[s].grid_index == g; ++s) {
            const Segment& seg = segments_[s];
            const std::size_t n = m_ - seg.first_live;
            for (std::size_t i = 0; i < n; ++i) z[i] = rng.normal();
            const auto& L = chol_[seg.first_live];
            for (std::size_t r = 0; r < n; ++r) {
                double acc = 0.0;
                for (std::size_t c = 0; c < n; ++c) acc += L[r * n + c] * z[c];
                x[seg.first_live + r] += seg.stdev[r] * acc;
            }
        }
        for (std::size_t m = 0; m < m_; ++m) out.price(m, g) = x[m];
    }
    return out;
}

GridPath simulate_diffusion(const ModelParams& p, const InitialPrices& f0, const std::vector<double>& grid_times,
                            RandomStream& rng) {
    return DiffusionGenerator(p, grid_times).simulate(f0, rng);
}

GridPath sample_onto_grid(const EventPath& path, const MaturityGrid& grid, const std::vector<double>& grid_times) {
    check_grid_times(grid_times);
    const std::size_t M = path.events.size();
    if (grid.size() != M || path.f0.size() != M) throw InvalidInput("sample_onto_grid: product count mismatch");
    const std::size_t G = grid_times.size();
    GridPath out;
    out.times = grid_times;
    out.products = M;
    out.prices.resize(M * G);
    for (std::size_t m = 0; m < M; ++m) {
        const auto& ev = path.events[m];
        const double cutoff = grid.cutoff(m);
        double level = path.f0[m];
        std::size_t e = 0;
        for (std::size_t g = 0; g < G; ++g) {
            const double t = std::min(grid_times[g], cutoff);
            for (; e < ev.size() && ev[e].time <= t; ++e) level += ev[e].size;
            out.price(m, g) = level;
        }
    }
    return out;
}

void simulate_batch(const ModelParams& p, const InitialPrices& f0, const std::vector<double>& grid_times,
                    const SimConfig& config, const std::function<void(std::size_t, const GridPath&)>& sink) {
    p.validate();
    check_f0(p, f0);
    check_grid_times(grid_times);
    std::optional<DiffusionGenerator> diffusion;
    if (config.generator == Generator::Diffusion) diffusion.emplace(p, grid_times);
    if (config.generator == Generator::Decomposition && p.mu_c > 0.0 && p.kappa == 0.0)
        throw InvalidInput("decomposition needs kappa > 0 when mu_c > 0; use the thinning generator");

    const std::size_t chunk = 1024;
    std::vector<GridPath> buffer;
    for (std::size_t begin = 0; begin < config.n_paths; begin += chunk) {
        const std::size_t n = std::min(chunk, config.n_paths - begin);
        buffer.assign(n, GridPath{});
        parallel_for(n, [&](std::size_t k) {
            RandomStream rng = RandomStream::child(config.master_seed, begin + k);
            switch (config.generator) {
                case Generator::Thinning:
                    buffer[k] = sample_onto_grid(simulate_thinning(p, f0, rng), p.grid, grid_times);
                    break;
                case Generator::Decomposition:
                    buffer[k] = sample_onto_grid(simulate_decomposition(p, f0, rng), p.grid, grid_times);
                    break;
                case Generator::Diffusion:
                    buffer[k] = diffusion->simulate(f0, rng);
                    break;
            }
        });
        for (std::size_t k = 0; k < n; ++k) sink(begin + k, buffer[k]);
    }
}

std::vector<GridPath> simulate_batch(const ModelParams& p, const InitialPrices& f0,
                                     const std::vector<double>& grid_times, const SimConfig& config) {
    std::vector<GridPath> out;
    out.reserve(config.n_paths);
    simulate_batch(p, f0, grid_times, config, [&](std::size_t, const GridPath& g) { out.push_back(g); });
    return out;
}

namespace {

void put_number(std::ostream& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, res.ptr - buf);
}

constexpr std::uint32_t kBinaryVersion = 1;

}  // namespace

GridPathWriter::GridPathWriter(std::ostream& out, Format format, const InitialPrices& f0,
                               const std::vector<double>& times, std::uint64_t n_paths)
    : out_(out), format_(format) {
    if (format_ == Format::Csv) {
        out_ << "# units: time=hours since session open (15:00 on D-1), price=EUR/MWh\n";
        out_ << "path_id,product,time,price\n";
        return;
    }
    out_.write("CSGP", 4);
    binio::put<std::uint32_t>(out_, kBinaryVersion);
    binio::put<std::uint32_t>(out_, static_cast<std::uint32_t>(f0.size()));
    binio::put<std::uint32_t>(out_, static_cast<std::uint32_t>(times.size()));
    binio::put<std::uint64_t>(out_, n_paths);
    for (double v : f0) binio::put(out_, v);
    for (double v : times) binio::put(out_, v);
}

void GridPathWriter::write(std::size_t path_id, const GridPath& path) {
    if (format_ == Format::Binary) {
        for (double v : path.prices) binio::put(out_, v);
        return;
    }
    const std::size_t G = path.times.size();
    for (std::size_t m = 0; m < path.products; ++m) {
        for (std::size_t g = 0; g < G; ++g) {
            out_ << path_id << ',' << (m + 1) << ',';
            put_number(out_, path.times[g]);
            out_ << ',';
            put_number(out_, path.price(m, g));
            out_ << '\n';
        }
    }
}

GridPathBatch read_grid_paths_binary(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "CSGP", 4) != 0) throw InvalidInput("grid path file: bad magic");
    const auto version = binio::get<std::uint32_t>(in, "grid path file");
    if (version != kBinaryVersion) throw InvalidInput("grid path file: unsupported version " + std::to_string(version));
    const auto M = binio::get<std::uint32_t>(in, "grid path file");
    const auto G = binio::get<std::uint32_t>(in, "grid path file");
    const auto n = binio::get<std::uint64_t>(in, "grid path file");
    GridPathBatch batch;
    for (std::uint32_t m = 0; m < M; ++m) batch.f0.push_back(binio::get<double>(in));
    for (std::uint32_t g = 0; g < G; ++g) batch.times.push_back(binio::get<double>(in));
    batch.paths.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        GridPath path;
        path.times = batch.times;
        path.products = M;
        path.prices.resize(static_cast<std::size_t>(M) * G);
        for (auto& v : path.prices) v = binio::get<double>(in, "grid path file");
        batch.paths.push_back(std::move(path));
    }
    return batch;
}

}  // namespace cshock
