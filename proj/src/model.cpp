#include "cshock/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "cshock/errors.hpp"
#include "cshock/rng.hpp"
#include "json.hpp"

namespace cshock {

using nlohmann::json;

MaturityGrid MaturityGrid::hourly(std::size_t products, double first, double lead) {
    MaturityGrid g;
    g.cutoff_lead = lead;
    g.maturities.resize(products);
    for (std::size_t m = 0; m < products; ++m) g.maturities[m] = first + static_cast<double>(m);
    return g;
}

void MaturityGrid::validate() const {
    if (maturities.empty()) throw InvalidInput("maturity grid: at least one maturity required");
    for (std::size_t m = 0; m < maturities.size(); ++m) {
        if (!(maturities[m] > 0.0) || !std::isfinite(maturities[m]))
            throw InvalidInput("maturity grid: maturities must be positive and finite");
        if (m > 0 && !(maturities[m] > maturities[m - 1]))
            throw InvalidInput("maturity grid: maturities must be strictly increasing");
    }
    if (!(cutoff_lead >= 0.0) || !(cutoff_lead < maturities.front()))
        throw InvalidInput("maturity grid: cutoff lead must lie in [0, T_1)");
}

JumpLaw::JumpLaw(std::vector<double> sizes, std::vector<double> probs) {
    if (sizes.size() != probs.size()) throw InvalidInput("jump law: sizes and probs differ in length");
    if (sizes.empty()) throw InvalidInput("jump law: at least one atom required");
    std::vector<std::size_t> order(sizes.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return sizes[a] < sizes[b]; });
    double total = 0.0;
    for (std::size_t i : order) {
        const double y = sizes[i];
        const double q = probs[i];
        if (!(y > 0.0) || !std::isfinite(y)) throw InvalidInput("jump law: sizes must be positive and finite");
        if (!(q > 0.0) || !(q <= 1.0)) throw InvalidInput("jump law: probabilities must lie in (0, 1]");
        if (!sizes_.empty() && y == sizes_.back()) throw InvalidInput("jump law: duplicate atom");
        sizes_.push_back(y);
        probs_.push_back(q);
        total += q;
        cdf_.push_back(total);
        m1_ += q * y;
        m2_ += q * y * y;
        m4_ += q * y * y * y * y;
    }
    if (std::fabs(total - 1.0) > 1e-12) throw InvalidInput("jump law: probabilities must sum to 1");
    cdf_.back() = 1.0;
}

double JumpLaw::sample(RandomStream& rng) const {
    if (sizes_.size() == 1) return sizes_.front();
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return sizes_[std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), sizes_.size() - 1)];
}

double total_variation(const JumpLaw& a, const JumpLaw& b) {
    std::map<long long, double> diff;
    for (std::size_t i = 0; i < a.atoms(); ++i) diff[std::llround(a.sizes()[i] * 1e6)] += a.probs()[i];
    for (std::size_t i = 0; i < b.atoms(); ++i) diff[std::llround(b.sizes()[i] * 1e6)] -= b.probs()[i];
    double tv = 0.0;
    for (const auto& [key, d] : diff) tv += std::fabs(d);
    return 0.5 * tv;
}

void ModelParams::validate() const {
    grid.validate();
    if (!(kappa >= 0.0) || !(mu >= 0.0) || !(mu_c >= 0.0) || !std::isfinite(kappa) || !std::isfinite(mu) ||
        !std::isfinite(mu_c))
        throw InvalidInput("model params: kappa, mu and mu_c must be finite and >= 0");
    if (!(mu + mu_c > 0.0)) throw InvalidInput("model params: mu + mu_c must be positive");
    if (jump_law.empty()) throw InvalidInput("model params: jump law is empty");
}

double exp_integral(double kappa, double anchor, double a, double b) {
    if (b <= a) return 0.0;
    const double tau = b - a;
    const double x = kappa * tau;
    const double tail = std::exp(-kappa * (anchor - b));
    if (x < 1e-8) return tail * tau * (1.0 - 0.5 * x);
    return tail * (-std::expm1(-x)) / kappa;
}

namespace {

void check_index(const ModelParams& p, std::size_t m) {
    if (m >= p.products()) throw InvalidInput("product index " + std::to_string(m) + " out of range");
}

}  // namespace

double intensity(const ModelParams& p, std::size_t m, double t) {
    check_index(p, m);
    const double tm = p.grid.maturities[m];
    if (t > tm) return 0.0;
    return (p.mu + p.mu_c) * std::exp(-p.kappa * (tm - t));
}

double integrated_intensity(const ModelParams& p, std::size_t m, double a, double b) {
    check_index(p, m);
    const double tm = p.grid.maturities[m];
    return (p.mu + p.mu_c) * exp_integral(p.kappa, tm, std::max(a, 0.0), std::min(b, tm));
}

double expected_covariation(const ModelParams& p, std::size_t k, std::size_t l, double t_start, double t_end) {
    check_index(p, k);
    check_index(p, l);
    if (!(t_start >= 0.0) || !(t_end >= t_start)) throw InvalidInput("expected_covariation: need 0 <= t_start <= t_end");
    const double tk = p.grid.maturities[k];
    const double tl = p.grid.maturities[l];
    const double coeff = (k == l) ? p.mu + p.mu_c : p.mu_c;
    return 2.0 * p.jump_law.m2() * coeff * exp_integral(p.kappa, std::max(tk, tl), t_start, std::min(t_end, std::min(tk, tl)));
}

double model_correlation(const ModelParams& p, std::size_t k, std::size_t l) {
    check_index(p, k);
    check_index(p, l);
    if (k == l) return 1.0;
    const double gap = std::fabs(p.grid.maturities[k] - p.grid.maturities[l]);
    return p.mu_c / (p.mu + p.mu_c) * std::exp(-0.5 * p.kappa * gap);
}

double common_jump_probability(const ModelParams& p, std::span<const std::size_t> m1,
                               std::span<const std::size_t> m2, double u, double t) {
    if (m1.empty() || m2.empty()) throw InvalidInput("common_jump_probability: index sets must be nonempty");
    for (auto i : m1) {
        check_index(p, i);
        if (std::find(m2.begin(), m2.end(), i) != m2.end())
            throw InvalidInput("common_jump_probability: index sets must be disjoint");
    }
    for (auto i : m2) check_index(p, i);
    if (!(u >= 0.0) || u > t) throw InvalidInput("common_jump_probability: need 0 <= u <= t");
    const std::size_t max1 = *std::max_element(m1.begin(), m1.end());
    const std::size_t min2 = *std::min_element(m2.begin(), m2.end());
    const double earliest = p.grid.maturities[std::min(*std::min_element(m1.begin(), m1.end()), min2)];
    if (t > earliest + 1e-12) throw InvalidInput("common_jump_probability: t must not exceed the earliest maturity");
    if (max1 > min2) return 0.0;
    const double hit_set = p.mu_c * exp_integral(p.kappa, p.grid.maturities[max1], u, t);
    const double miss_set = p.mu_c * exp_integral(p.kappa, p.grid.maturities[min2], u, t);
    return -std::expm1(-(hit_set - miss_set)) * std::exp(-miss_set);
}

double volatility_proxy(const ModelParams& p) {
    if (!(p.kappa > 0.0)) throw InvalidInput("volatility_proxy: kappa must be positive");
    return std::sqrt(2.0 * (p.mu + p.mu_c) / p.kappa * p.jump_law.m2());
}

double correlation_proxy(const ModelParams& p, double gap_hours) {
    if (!(gap_hours >= 0.0)) throw InvalidInput("correlation_proxy: gap must be >= 0");
    return p.mu_c / (p.mu + p.mu_c) * std::exp(-0.5 * p.kappa * gap_hours);
}

namespace {

json params_document(const ModelParams& p) {
    json j;
    j["units"] = {{"kappa", "1/hour"},
                  {"mu", "1/hour"},
                  {"mu_c", "1/hour"},
                  {"maturities", "hours since session open (15:00 on D-1)"},
                  {"cutoff_lead", "hours"},
                  {"jump_law.sizes", "EUR/MWh"}};
    j["kappa"] = p.kappa;
    j["mu"] = p.mu;
    j["mu_c"] = p.mu_c;
    j["maturities"] = p.grid.maturities;
    j["cutoff_lead"] = p.grid.cutoff_lead;
    j["jump_law"] = {{"sizes", std::vector<double>(p.jump_law.sizes().begin(), p.jump_law.sizes().end())},
                     {"probs", std::vector<double>(p.jump_law.probs().begin(), p.jump_law.probs().end())}};
    return j;
}

}  // namespace

std::string params_to_json(const ModelParams& p) { return params_document(p).dump(2); }

ModelParams params_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("params JSON: ") + e.what());
    }
    try {
        ModelParams p;
        p.kappa = j.at("kappa").get<double>();
        p.mu = j.at("mu").get<double>();
        p.mu_c = j.at("mu_c").get<double>();
        if (j.contains("maturities")) {
            p.grid.maturities = j.at("maturities").get<std::vector<double>>();
            p.grid.cutoff_lead = j.value("cutoff_lead", 1.0);
        } else {
            p.grid = MaturityGrid::hourly(24, 9.0, j.value("cutoff_lead", 1.0));
        }
        const auto& law = j.at("jump_law");
        p.jump_law = JumpLaw(law.at("sizes").get<std::vector<double>>(), law.at("probs").get<std::vector<double>>());
        p.validate();
        return p;
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("params JSON: ") + e.what());
    }
}

ModelParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return params_from_json(ss.str());
}

void save_params(const ModelParams& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << params_to_json(p) << '\n';
}

std::uint64_t params_hash(const ModelParams& p) {
    const std::string text = params_document(p).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace cshock
