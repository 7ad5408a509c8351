#pragma once

// Tick ingestion, cleaning, realized-covariation diagnostics and the
// three-stage moment estimator (jump law, kappa, mu + mu_c, mu_c / (mu + mu_c)).

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cshock/calendar.hpp"
#include "cshock/model.hpp"

namespace cshock {

struct Tick {
    double time = 0.0;   // session hours
    double price = 0.0;  // EUR/MWh
};

struct SessionTicks {
    Date delivery_date{};
    std::vector<std::vector<Tick>> products;  // per product, strictly increasing times
};

struct TickDataset {
    MaturityGrid grid = MaturityGrid::hourly();
    double tick_size = 0.01;
    std::string country;
    std::vector<SessionTicks> sessions;  // sorted by delivery date, unique dates

    std::size_t products() const noexcept { return grid.size(); }
};

// CSV with header delivery_date,product,timestamp_s,price. Product is 1-based,
// timestamp in seconds since session open. Records sharing a timestamp collapse
// to the last one in file order. Errors name the offending line.
TickDataset read_ticks_csv(std::istream& in, const MaturityGrid& grid = MaturityGrid::hourly(),
                           const std::string& source = "ticks");
TickDataset load_ticks_csv(const std::string& path, const MaturityGrid& grid = MaturityGrid::hourly());
void write_ticks_csv(const TickDataset& data, std::ostream& out);

// Day-ahead prices: delivery_date,product,spot_price.
using SpotTable = std::map<Date, std::vector<double>>;
SpotTable read_spot_csv(std::istream& in, std::size_t products = 24, const std::string& source = "spot");
SpotTable load_spot_csv(const std::string& path, std::size_t products = 24);
void write_spot_csv(const SpotTable& spot, std::ostream& out);

// Synthetic sessions: session d is the thinning path of RandomStream::child(seed, d),
// recorded as an opening tick at t = 0 plus one tick per event up to the cutoff.
TickDataset synthesize_ticks(const ModelParams& p, const InitialPrices& f0, std::size_t sessions, Date first_date,
                             std::uint64_t seed);

struct ProductCleaning {
    std::size_t removed = 0;
    std::size_t total = 0;  // returns before cleaning
    double threshold = 0.0;
    double removed_fraction() const { return total == 0 ? 0.0 : static_cast<double>(removed) / total; }
};

struct CleaningReport {
    std::vector<ProductCleaning> products;
    double multiplier = 5.0;
};

// Drops ticks whose return against the last kept tick exceeds multiplier times
// the pooled standard deviation of that product's raw returns.
std::pair<TickDataset, CleaningReport> clean(const TickDataset& raw, double multiplier = 5.0);

struct EstimationWindows {
    std::vector<double> begin;  // T_{b,m}
    std::vector<double> end;    // T_{e,m}
    double delta = 0.5;         // sampling step, hours
    double min_overlap = 1.0;   // pair overlap threshold, hours

    // [0, T_m - cutoff lead] for every product.
    static EstimationWindows standard(const MaturityGrid& grid, double delta = 0.5, double min_overlap = 1.0);
    void validate(const MaturityGrid& grid) const;
};

// Sum over i = 1..floor((t_end - t_start) / delta) of products of increments of
// LOCF prices sampled at t_start + i delta.
double realized_covariation(const SessionTicks& session, std::size_t k, std::size_t l, double delta, double t_start,
                            double t_end);

// C(delta, t_end) - C(delta, t_begin) with the sampling grid anchored at 0.
double covariation_increment(const SessionTicks& session, std::size_t k, std::size_t l, double delta, double t_begin,
                             double t_end);

struct SignaturePoint {
    double delta = 0.0;
    double value = 0.0;  // mean over sessions of C_mm(delta, T) / T, T = cutoff
};
std::vector<SignaturePoint> signature_plot(const TickDataset& data, std::size_t m, const std::vector<double>& deltas);

// Ratio of session-summed covariation increments over the overlap of the two
// windows; nullopt when a denominator vanishes.
std::optional<double> epps_correlation(const TickDataset& data, std::size_t l, std::size_t m, double delta,
                                       const EstimationWindows& windows);

JumpLaw fit_jump_law(const TickDataset& data);

struct KappaFit {
    double kappa = 0.0;
    double contrast = 0.0;
    std::vector<double> lambda_hat;  // per product, jumps per hour per sign pair
    std::vector<std::size_t> jumps;  // per product, pooled over sessions
};

// Sum over products of the least-squares intensity contrast, as a function of kappa.
class KappaContrast {
public:
    KappaContrast(const TickDataset& data, const EstimationWindows& windows);
    double operator()(double kappa) const;
    double product_term(std::size_t m, double kappa) const;
    bool identifiable() const noexcept { return total_jumps_ > 0; }
    const std::vector<std::size_t>& jumps() const noexcept { return counts_; }
    std::size_t sessions() const noexcept { return sessions_; }

private:
    std::vector<std::vector<double>> lead_;  // per product: T_m - t_j over all jumps
    std::vector<std::size_t> counts_;
    std::vector<double> begin_, end_, maturity_;
    std::size_t sessions_ = 0;
    std::size_t total_jumps_ = 0;
};

KappaFit estimate_kappa(const TickDataset& data, const EstimationWindows& windows, double kappa_max = 5.0);

struct MuSumFit {
    double mu_sum = 0.0;
    std::vector<double> mean_increment;  // per product, D^-1 sum_d C_mm increments
    std::vector<double> integral;        // per product, integral of exp(-kappa (T_m - s)) on the floored window
    std::vector<double> residual;        // mean_increment - 2 mu_sum m2 integral
    bool floored = false;
};
MuSumFit estimate_mu_sum(const TickDataset& data, const EstimationWindows& windows, double kappa,
                         const JumpLaw& law);

struct PairCorrelation {
    std::size_t l = 0;
    std::size_t m = 0;
    double rho = 0.0;
};

struct MuRatioFit {
    double mu_ratio = 0.0;
    double raw_ratio = 0.0;  // before clipping to [0, 1]
    std::vector<PairCorrelation> pairs;
};
// Uses unordered pairs l < m whose window overlap is at least min_overlap.
MuRatioFit estimate_mu_ratio(const TickDataset& data, const EstimationWindows& windows, double kappa);

struct FittedParams {
    ModelParams params;
    std::size_t sessions = 0;
    double contrast = 0.0;
    std::vector<double> lambda_hat;
    std::vector<double> mu_sum_residuals;
    std::vector<PairCorrelation> correlations;
    double mu_sum = 0.0;
    double mu_ratio = 0.0;
    CleaningReport cleaning;
    std::vector<std::string> warnings;
};

// clean -> jump law -> kappa -> mu_S -> mu_R. Pass clean_first = false when the
// data are already cleaned.
FittedParams estimate(const TickDataset& data, const EstimationWindows& windows, bool clean_first = true,
                      double kappa_max = 5.0);

std::string fitted_to_json(const FittedParams& fit);

// Mondays t with t - 28 >= first session date and t <= last session date + 1.
std::vector<Date> weekly_schedule(const TickDataset& data, int lookback_days = 28);

struct RollingRow {
    Date week_start{};
    FittedParams fit;
};

// Each scheduled date t is estimated on sessions in [t - lookback, t - 1],
// re-cleaned per window. Windows without data or without jumps are skipped
// and reported through warnings.
std::vector<RollingRow> rolling_estimate(const TickDataset& data, const EstimationWindows& windows,
                                         const std::vector<Date>& schedule, std::vector<std::string>* warnings = nullptr,
                                         int lookback_days = 28);

// week_start,kappa,mu,mu_c,sigma_proxy,rho_proxy (rho for consecutive maturities).
void write_rolling_csv(const std::vector<RollingRow>& rows, std::ostream& out);

// Full weekly parameter sets, jump law included: {"weeks": [{"week_start", "params"}]}.
// Reading restores params only; diagnostics are not kept.
std::string rolling_to_json(const std::vector<RollingRow>& rows);
std::vector<RollingRow> rolling_from_json(const std::string& text);
std::vector<RollingRow> load_rolling_json(const std::string& path);

}  // namespace cshock
