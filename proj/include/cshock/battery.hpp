#pragma once

// Battery valuation over one intraday session: regression-based backward
// induction on simulated paths, forward application to observed prices, and
// the deterministic day-ahead ("spot") schedule.
//
// Step i trades product i at its decision time tau_i = T_i - 1h (the product's
// trading cutoff) with control c in {-1, 0, +1} x power. Stock is tracked in
// units of power, levels 0..capacity/power, starting empty. Leftover stock at
// the end of the session is worthless.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cshock/calendar.hpp"
#include "cshock/estimation.hpp"
#include "cshock/model.hpp"
#include "cshock/regression.hpp"
#include "cshock/simulation.hpp"

namespace cshock {

struct BatterySpec {
    double capacity_mwh = 2.0;
    double power_mw = 1.0;  // MWh per one-hour step
    double efficiency = 0.92;
    double initial_stock_mwh = 0.0;

    std::size_t levels() const;  // capacity / power
    void validate() const;
};

// The `value` input document: {capacity_mwh, power_mw, efficiency, p, n_paths, seed}.
struct ValueConfig {
    BatterySpec battery;
    std::size_t p = 3;
    std::size_t n_paths = 500000;
    std::uint64_t seed = 0;
};
ValueConfig value_config_from_json(const std::string& text);
ValueConfig load_value_config(const std::string& path);

// Observation time of the regression features at step i. AtDecision uses
// tau_i, the latest information available when the control is chosen;
// AtNextDecision uses tau_{i+1}.
enum class FeatureTiming : std::uint32_t { AtDecision = 0, AtNextDecision = 1 };

inline constexpr std::size_t kMaxFeatures = 6;

struct DecisionSchedule {
    std::vector<double> decision_times;  // tau_i, session hours
    std::size_t p = 1;
    FeatureTiming timing = FeatureTiming::AtDecision;

    static DecisionSchedule standard(const MaturityGrid& grid, std::size_t p,
                                     FeatureTiming timing = FeatureTiming::AtDecision);
    std::size_t steps() const noexcept { return decision_times.size(); }
    std::size_t features_at(std::size_t step) const;  // min(p, steps - 1 - step)
    std::size_t feature_time_index(std::size_t step) const;
};

// EUR paid (negative) or received (positive) for control c MWh at price.
double cashflow(double c, double price, double efficiency);

// Admissible controls (in units of power) at stock level s, in tie-break order 0, -1, +1.
std::vector<int> admissible_controls(const BatterySpec& spec, std::size_t level);

// Simulated prices at decision times, stored as increments over f0 so one set
// serves every initial curve and every p. Row (path, step) holds the execution
// increment of product step followed by kMaxFeatures feature increments.
class TrainingSet {
public:
    static TrainingSet simulate(const ModelParams& p, Generator generator, std::size_t n_paths, std::uint64_t seed,
                                FeatureTiming timing = FeatureTiming::AtDecision);
    static TrainingSet from_paths(const std::vector<GridPath>& paths, const InitialPrices& f0,
                                  FeatureTiming timing = FeatureTiming::AtDecision);

    std::size_t paths() const noexcept { return n_paths_; }
    std::size_t steps() const noexcept { return steps_; }
    FeatureTiming timing() const noexcept { return timing_; }
    Generator generator() const noexcept { return generator_; }
    std::uint64_t params_hash() const noexcept { return params_hash_; }
    const std::vector<double>& decision_times() const noexcept { return decision_times_; }

    double execution(std::size_t path, std::size_t step) const { return row(path, step)[0]; }
    double feature(std::size_t path, std::size_t step, std::size_t q) const { return row(path, step)[1 + q]; }

private:
    static constexpr std::size_t kWidth = 1 + kMaxFeatures;
    const double* row(std::size_t path, std::size_t step) const { return data_.data() + (path * steps_ + step) * kWidth; }

    std::size_t n_paths_ = 0;
    std::size_t steps_ = 0;
    FeatureTiming timing_ = FeatureTiming::AtDecision;
    Generator generator_ = Generator::Thinning;
    std::uint64_t params_hash_ = 0;
    std::vector<double> decision_times_;
    std::vector<double> data_;
};

struct PolicyStep {
    std::size_t features = 0;
    QuantileMesh mesh;
    std::vector<LocalLinearModel> continuation;  // per post-decision stock level
};

struct Policy {
    BatterySpec battery;
    std::size_t p = 1;
    FeatureTiming timing = FeatureTiming::AtDecision;
    Generator generator = Generator::Thinning;
    std::uint64_t params_hash = 0;
    double optimisation_value = 0.0;
    InitialPrices f0;
    std::vector<double> decision_times;
    std::vector<PolicyStep> steps;

    // Control in units of power for the given step, stock level and feature vector.
    int decide(std::size_t step, std::size_t level, const double* features, double price) const;

    void write(std::ostream& out) const;
    static Policy read(std::istream& in);
    void save(const std::string& path) const;
    static Policy load(const std::string& path);
};

struct OptimizeResult {
    Policy policy;
    double value = 0.0;      // mean realized gain over training paths, EUR
    double std_error = 0.0;  // of that mean
    std::vector<std::string> warnings;
};

OptimizeResult optimize(const TrainingSet& training, const InitialPrices& f0, const BatterySpec& spec, std::size_t p);
OptimizeResult optimize(const ModelParams& params, const InitialPrices& f0, const BatterySpec& spec, std::size_t p,
                        Generator generator, std::size_t n_paths, std::uint64_t seed,
                        FeatureTiming timing = FeatureTiming::AtDecision);

// Observed prices: at(t, j) is product j's price at decision time tau_t.
struct DecisionPrices {
    std::size_t products = 0;
    std::vector<double> values;

    double at(std::size_t t, std::size_t j) const { return values[t * products + j]; }
};

// The grid of path must be the decision times.
DecisionPrices decision_prices_from_grid(const GridPath& path);
// Last trade at or before each decision time; products without one take the
// fallback (day-ahead) price and are counted in *fallbacks.
DecisionPrices decision_prices_from_ticks(const SessionTicks& session, const MaturityGrid& grid,
                                          std::span<const double> fallback, std::size_t* fallbacks = nullptr);

struct BacktestResult {
    double gain = 0.0;
    std::vector<int> controls;
};
BacktestResult backtest(const Policy& policy, const DecisionPrices& observed);

struct SpotResult {
    std::vector<int> controls;
    double value = 0.0;
};
// Exact deterministic DP on day-ahead prices.
SpotResult spot_strategy(std::span<const double> spot, const BatterySpec& spec);

// Gain of a fixed control sequence executed at each product's decision-time price.
double execute_controls(std::span<const int> controls, const DecisionPrices& observed, const BatterySpec& spec);

// "spot", "poisson" (thinning or decomposition training) or "diffusion".
std::string strategy_name(Generator g);

struct DailyGain {
    Date date{};
    std::size_t p = 0;  // 0 for the spot strategy
    std::string strategy;
    double gain = 0.0;
};

struct AnnualRow {
    int year = 0;
    std::size_t p = 0;
    double spot = 0.0;
    double poisson = 0.0;
    double diffusion = 0.0;
    bool has_poisson = false;
    bool has_diffusion = false;
};

struct ValuationReport {
    std::vector<DailyGain> daily;
    // (strategy, p) -> mean optimisation value over the trained policies
    std::map<std::pair<std::string, std::size_t>, double> optimisation_values;
    std::vector<std::string> warnings;

    // Sums per (year, p); throws InvalidInput on a duplicate (date, p, strategy).
    std::vector<AnnualRow> annual() const;
};

void write_daily_gains_csv(const std::vector<DailyGain>& rows, std::ostream& out);
std::vector<DailyGain> read_daily_gains_csv(std::istream& in, const std::string& source = "gains");
void write_annual_csv(const std::vector<AnnualRow>& rows, std::ostream& out);
std::string annual_to_json(const std::vector<AnnualRow>& rows);

// One fixed policy over every session that has spot prices, plus the spot
// schedule on the same days.
ValuationReport backtest_policy(const Policy& policy, const TickDataset& data, const SpotTable& spot,
                                bool with_spot = true);

struct CampaignDay {
    Date date{};
    ModelParams params;
    InitialPrices spot;       // day-ahead prices; also the training f0
    DecisionPrices observed;  // intraday prices at decision times
};

struct CampaignConfig {
    std::vector<std::size_t> p_list{1, 3, 5};
    std::vector<Generator> generators{Generator::Thinning, Generator::Diffusion};
    std::size_t n_paths = 50000;
    std::uint64_t seed = 0;
    FeatureTiming timing = FeatureTiming::AtDecision;
    bool spot = true;
};

// Per day: train (cached by params, f0, generator, p), backtest, and run the
// spot schedule against the same observed prices.
ValuationReport backtest_campaign(const std::vector<CampaignDay>& days, const BatterySpec& spec,
                                  const CampaignConfig& config);

// Tick-data campaign: day d uses the latest weekly estimate dated on or before d
// and the day's spot prices as f0 and fallback.
ValuationReport backtest_campaign(const TickDataset& data, const std::vector<RollingRow>& weekly,
                                  const SpotTable& spot, const BatterySpec& spec, const CampaignConfig& config);

}  // namespace cshock
