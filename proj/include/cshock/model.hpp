#pragma once

// Common-shock Poisson model of the 24 hourly intraday products.
//
// Clock: t = 0 is the session open (15:00 on day D-1), times in hours. The
// canonical grid puts the delivery start of product m (1-based) at
// T_m = 9 + (m - 1). Product indices in the C++ API are 0-based.
//
// Per sign h in {+, -}, product m jumps with intensity
//     (mu + mu_c) * exp(-kappa * (T_m - t)) * 1{t <= T_m}
// where the mu part is idiosyncratic and the mu_c part comes from a shared
// Poisson measure: a shock accepted by a product with maturity T_j is also
// accepted by every still-open product with an earlier maturity.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cshock {

class RandomStream;

struct MaturityGrid {
    std::vector<double> maturities;  // strictly increasing, > 0
    double cutoff_lead = 1.0;        // product m trades on [0, T_m - lead]

    static MaturityGrid hourly(std::size_t products = 24, double first = 9.0, double lead = 1.0);

    std::size_t size() const noexcept { return maturities.size(); }
    double maturity(std::size_t m) const { return maturities.at(m); }
    double cutoff(std::size_t m) const { return maturities.at(m) - cutoff_lead; }
    double horizon() const { return maturities.back(); }
    void validate() const;
};

/// Discrete law of absolute return sizes (EUR/MWh), atoms on the 0.01 tick grid.
class JumpLaw {
public:
    JumpLaw() = default;
    JumpLaw(std::vector<double> sizes, std::vector<double> probs);

    static JumpLaw single(double size) { return JumpLaw({size}, {1.0}); }

    std::span<const double> sizes() const noexcept { return sizes_; }
    std::span<const double> probs() const noexcept { return probs_; }
    std::size_t atoms() const noexcept { return sizes_.size(); }
    bool empty() const noexcept { return sizes_.empty(); }

    double m1() const noexcept { return m1_; }
    double m2() const noexcept { return m2_; }
    double m4() const noexcept { return m4_; }

    double sample(RandomStream& rng) const;

    friend bool operator==(const JumpLaw& a, const JumpLaw& b) {
        return a.sizes_ == b.sizes_ && a.probs_ == b.probs_;
    }

private:
    std::vector<double> sizes_;
    std::vector<double> probs_;
    std::vector<double> cdf_;
    double m1_ = 0.0;
    double m2_ = 0.0;
    double m4_ = 0.0;
};

// Total-variation distance between two discrete laws (atoms matched on the tick grid).
double total_variation(const JumpLaw& a, const JumpLaw& b);

struct ModelParams {
    double kappa = 0.0;  // 1/hour
    double mu = 0.0;     // 1/hour, idiosyncratic
    double mu_c = 0.0;   // 1/hour, common shock
    MaturityGrid grid;
    JumpLaw jump_law;

    std::size_t products() const noexcept { return grid.size(); }
    void validate() const;
};

using InitialPrices = std::vector<double>;

// Closed-form integral of exp(-kappa * (anchor - s)) over [a, b]. Uses the
// kappa -> 0 limit below kappa * (b - a) = 1e-8.
double exp_integral(double kappa, double anchor, double a, double b);

// Per-sign intensity of product m at time t.
double intensity(const ModelParams& p, std::size_t m, double t);

// Per-sign compensator of product m over [a, b].
double integrated_intensity(const ModelParams& p, std::size_t m, double a, double b);

// E[C_kl] over [t_start, t_end]: 2 m2 c_kl int exp(-kappa(max(T_k,T_l) - s)) 1{s <= min(T_k,T_l)} ds
// with c_kk = mu + mu_c and c_kl = mu_c for k != l.
double expected_covariation(const ModelParams& p, std::size_t k, std::size_t l, double t_start, double t_end);

double model_correlation(const ModelParams& p, std::size_t k, std::size_t l);

// Probability that, over [u, t], the common measure of one sign hits every
// product in m1 and none in m2.
double common_jump_probability(const ModelParams& p, std::span<const std::size_t> m1,
                               std::span<const std::size_t> m2, double u, double t);

// sqrt(2 (mu + mu_c) m2 / kappa), EUR/MWh/sqrt(hour).
double volatility_proxy(const ModelParams& p);

// mu_c/(mu+mu_c) exp(-kappa gap / 2): correlation of two products gap_hours apart.
double correlation_proxy(const ModelParams& p, double gap_hours);

// JSON document {units, kappa, mu, mu_c, maturities, cutoff_lead, jump_law: {sizes, probs}}.
std::string params_to_json(const ModelParams& p);
ModelParams params_from_json(const std::string& text);
ModelParams load_params(const std::string& path);
void save_params(const ModelParams& p, const std::string& path);

// FNV-1a of the canonical JSON dump; used in run manifests.
std::uint64_t params_hash(const ModelParams& p);

}  // namespace cshock
