#pragma once

// Path generators for the common-shock model.
//
// Two exact jump generators (thinning of the common Poisson measure, and the
// layered compound-Poisson decomposition) produce EventPaths; the
// diffusion-limit generator produces GridPaths directly. All randomness comes
// from RandomStream, so path i of a batch depends only on (master_seed, i).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cshock/model.hpp"

namespace cshock {

class RandomStream;

enum class Generator { Thinning, Decomposition, Diffusion };

const char* generator_name(Generator g);
Generator parse_generator(const std::string& name);

inline constexpr std::int64_t kIdiosyncratic = -1;

struct Event {
    double time = 0.0;         // session hours
    double size = 0.0;         // signed, EUR/MWh
    std::int64_t origin = kIdiosyncratic;  // common shock id, or kIdiosyncratic
};

struct EventPath {
    InitialPrices f0;
    std::vector<std::vector<Event>> events;  // per product, sorted by time
};

// Prices of M products on a shared time grid, stored product-major.
struct GridPath {
    std::vector<double> times;
    std::vector<double> prices;  // prices[m * times.size() + g]
    std::size_t products = 0;

    double price(std::size_t m, std::size_t g) const { return prices[m * times.size() + g]; }
    double& price(std::size_t m, std::size_t g) { return prices[m * times.size() + g]; }
};

// Rate scale * exp(-kappa * (anchor - t)) on [window_start, window_end].
struct RateSpec {
    double scale = 0.0;
    double kappa = 0.0;
    double anchor = 0.0;
    double window_start = 0.0;
    double window_end = 0.0;
};

// Events of one sign from an inhomogeneous compound Poisson process, by
// inversion of the compensator. Times are sorted; sizes are sign * draw from law.
std::vector<Event> sample_inhomogeneous_cpp(const RateSpec& rate, const JumpLaw& law, RandomStream& rng,
                                            double sign = 1.0, std::int64_t origin = kIdiosyncratic);
std::vector<Event> sample_inhomogeneous_cpp(const RateSpec& rate, const JumpLaw& law, std::uint64_t seed);

EventPath simulate_thinning(const ModelParams& p, const InitialPrices& f0, RandomStream& rng);
EventPath simulate_thinning(const ModelParams& p, const InitialPrices& f0, std::uint64_t seed);

// Requires kappa > 0 when mu_c > 0. Falls back to thinning when mu == 0 or mu_c == 0.
EventPath simulate_decomposition(const ModelParams& p, const InitialPrices& f0, RandomStream& rng);
EventPath simulate_decomposition(const ModelParams& p, const InitialPrices& f0, std::uint64_t seed);

// Gaussian limit: df_m = sqrt(2 m2 (mu + mu_c)) exp(-kappa (T_m - s) / 2) dW_m,
// corr(W_k, W_l) = ((mu delta_kl + mu_c) / (mu + mu_c)) exp(-kappa |T_k - T_l| / 2).
// Increments between grid points are exact. Product m is frozen after its cutoff.
class DiffusionGenerator {
public:
    DiffusionGenerator(const ModelParams& p, std::vector<double> grid_times);

    GridPath simulate(const InitialPrices& f0, RandomStream& rng) const;

    // Smallest eigenvalue of the correlation matrix before any jitter.
    double min_eigenvalue() const noexcept { return min_eigenvalue_; }

private:
    struct Segment {
        std::size_t grid_index;  // index of the grid point closing this segment
        std::size_t first_live;  // products [first_live, M) move on the segment
        std::vector<double> stdev;  // per live product
    };

    std::size_t m_ = 0;
    std::vector<double> times_;
    std::vector<Segment> segments_;
    std::vector<std::vector<double>> chol_;  // per first_live: packed lower factor of the trailing block
    double min_eigenvalue_ = 0.0;
};

GridPath simulate_diffusion(const ModelParams& p, const InitialPrices& f0, const std::vector<double>& grid_times,
                            RandomStream& rng);

// Right-continuous step function f0 + sum of sizes with time <= min(t, cutoff_m).
GridPath sample_onto_grid(const EventPath& path, const MaturityGrid& grid, const std::vector<double>& grid_times);

struct SimConfig {
    std::size_t n_paths = 1;
    std::uint64_t master_seed = 0;
    Generator generator = Generator::Thinning;
};

// Path i uses RandomStream::child(master_seed, i). Paths are generated in
// parallel chunks and handed to sink in index order.
void simulate_batch(const ModelParams& p, const InitialPrices& f0, const std::vector<double>& grid_times,
                    const SimConfig& config, const std::function<void(std::size_t, const GridPath&)>& sink);
std::vector<GridPath> simulate_batch(const ModelParams& p, const InitialPrices& f0,
                                     const std::vector<double>& grid_times, const SimConfig& config);

// Batch writers. CSV: a "# units" comment line, then path_id,product,time,price
// with 1-based product. Binary (little-endian): "CSGP", u32 version, u32 M,
// u32 G, u64 n_paths, f64 f0[M], f64 times[G], then per path f64 prices[M*G].
class GridPathWriter {
public:
    enum class Format { Csv, Binary };

    GridPathWriter(std::ostream& out, Format format, const InitialPrices& f0, const std::vector<double>& times,
                   std::uint64_t n_paths);
    void write(std::size_t path_id, const GridPath& path);

private:
    std::ostream& out_;
    Format format_;
};

struct GridPathBatch {
    InitialPrices f0;
    std::vector<double> times;
    std::vector<GridPath> paths;
};

GridPathBatch read_grid_paths_binary(std::istream& in);

}  // namespace cshock
