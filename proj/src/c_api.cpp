#include "cshock/cshock.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "cshock/battery.hpp"
#include "cshock/errors.hpp"
#include "cshock/estimation.hpp"
#include "cshock/model.hpp"
#include "cshock/parallel.hpp"
#include "cshock/simulation.hpp"
#include "json.hpp"

struct cshock_params {
    cshock::ModelParams params;
};

struct cshock_ticks {
    cshock::TickDataset data;
};

struct cshock_spot {
    cshock::SpotTable table;
    std::size_t products = 24;
};

struct cshock_fit {
    cshock::FittedParams fit;
};

struct cshock_rolling {
    std::vector<cshock::RollingRow> rows;
    std::vector<std::string> warnings;
};

struct cshock_policy {
    cshock::Policy policy;
    double std_error = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::string> warnings;
};

struct cshock_report {
    cshock::ValuationReport report;
};

namespace {

thread_local std::string g_last_error;

template <class F>
cshock_status guard(F&& f) {
    try {
        f();
        g_last_error.clear();
        return CSHOCK_OK;
    } catch (const cshock::InvalidInput& e) {
        g_last_error = e.what();
        return CSHOCK_ERR_INVALID_INPUT;
    } catch (const cshock::NumericalError& e) {
        g_last_error = e.what();
        return CSHOCK_ERR_NUMERICAL;
    } catch (const cshock::IoError& e) {
        g_last_error = e.what();
        return CSHOCK_ERR_IO;
    } catch (const std::out_of_range& e) {
        g_last_error = e.what();
        return CSHOCK_ERR_INVALID_INPUT;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return CSHOCK_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CSHOCK_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return CSHOCK_ERR_INTERNAL;
    }
}

template <class T>
const T& need(const T* p, const char* what) {
    if (!p) throw cshock::InvalidInput(std::string(what) + " is NULL");
    return *p;
}

void need_out(const void* p) {
    if (!p) throw cshock::InvalidInput("output pointer is NULL");
}

std::string need_str(const char* s, const char* what) {
    if (!s) throw cshock::InvalidInput(std::string(what) + " is NULL");
    return s;
}

std::vector<double> to_vector(const double* v, std::size_t n, const char* what) {
    if (n > 0 && !v) throw cshock::InvalidInput(std::string(what) + " is NULL");
    return std::vector<double>(v, v + n);
}

std::ofstream open_out(const std::string& path, bool binary = false) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw cshock::IoError("cannot write " + path);
    return out;
}

void close_out(std::ofstream& out, const std::string& path) {
    out.close();
    if (!out) throw cshock::IoError("write failed: " + path);
}

void write_text(const std::string& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
    close_out(out, path);
}

cshock::Generator to_generator(cshock_generator g) {
    switch (g) {
        case CSHOCK_GEN_THINNING: return cshock::Generator::Thinning;
        case CSHOCK_GEN_DECOMPOSITION: return cshock::Generator::Decomposition;
        case CSHOCK_GEN_DIFFUSION: return cshock::Generator::Diffusion;
    }
    throw cshock::InvalidInput("unknown generator");
}

cshock::FeatureTiming to_timing(cshock_feature_timing t) {
    switch (t) {
        case CSHOCK_FEATURES_AT_DECISION: return cshock::FeatureTiming::AtDecision;
        case CSHOCK_FEATURES_AT_NEXT_DECISION: return cshock::FeatureTiming::AtNextDecision;
    }
    throw cshock::InvalidInput("unknown feature timing");
}

cshock::BatterySpec to_spec(const cshock_battery* b) {
    const auto& battery = need(b, "battery");
    cshock::BatterySpec spec;
    spec.capacity_mwh = battery.capacity_mwh;
    spec.power_mw = battery.power_mw;
    spec.efficiency = battery.efficiency;
    spec.validate();
    return spec;
}

cshock::EstimationWindows to_windows(const cshock::TickDataset& data, const cshock_windows* w) {
    if (!w) return cshock::EstimationWindows::standard(data.grid);
    auto windows = cshock::EstimationWindows::standard(data.grid, w->delta, w->min_overlap);
    if (w->begin || w->end) {
        if (!w->begin || !w->end) throw cshock::InvalidInput("windows: give both begin and end");
        if (w->n != data.products()) throw cshock::InvalidInput("windows: one bound per product required");
        windows.begin.assign(w->begin, w->begin + w->n);
        windows.end.assign(w->end, w->end + w->n);
    }
    windows.validate(data.grid);
    return windows;
}

const char* warning_at(const std::vector<std::string>& w, std::size_t i) {
    return i < w.size() ? w[i].c_str() : nullptr;
}

}  // namespace

extern "C" {

const char* cshock_version(void) { return CSHOCK_VERSION_STRING; }

const char* cshock_last_error(void) { return g_last_error.c_str(); }

const char* cshock_status_name(cshock_status status) {
    switch (status) {
        case CSHOCK_OK: return "ok";
        case CSHOCK_ERR_INVALID_INPUT: return "invalid_input";
        case CSHOCK_ERR_NUMERICAL: return "numerical";
        case CSHOCK_ERR_IO: return "io";
        case CSHOCK_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

void cshock_set_threads(size_t n) { cshock::set_thread_count(static_cast<unsigned>(n)); }

size_t cshock_threads(void) { return cshock::thread_count(); }

cshock_status cshock_parse_generator(const char* name, cshock_generator* out) {
    return guard([&] {
        need_out(out);
        *out = static_cast<cshock_generator>(cshock::parse_generator(need_str(name, "generator name")));
    });
}

cshock_status cshock_params_load(const char* path, cshock_params** out) {
    return guard([&] {
        need_out(out);
        *out = new cshock_params{cshock::load_params(need_str(path, "path"))};
    });
}

cshock_status cshock_params_from_json(const char* json, cshock_params** out) {
    return guard([&] {
        need_out(out);
        *out = new cshock_params{cshock::params_from_json(need_str(json, "json"))};
    });
}

cshock_status cshock_params_save(const cshock_params* params, const char* path) {
    return guard([&] { cshock::save_params(need(params, "params").params, need_str(path, "path")); });
}

cshock_status cshock_params_to_json(const cshock_params* params, char* buf, size_t cap, size_t* len) {
    return guard([&] {
        const std::string s = cshock::params_to_json(need(params, "params").params);
        if (len) *len = s.size();
        if (buf && cap > 0) {
            const std::size_t n = std::min(cap - 1, s.size());
            std::memcpy(buf, s.data(), n);
            buf[n] = '\0';
        }
    });
}

void cshock_params_free(cshock_params* params) { delete params; }

size_t cshock_params_products(const cshock_params* params) { return params ? params->params.products() : 0; }

uint64_t cshock_params_hash(const cshock_params* params) {
    return params ? cshock::params_hash(params->params) : 0;
}

double cshock_params_cutoff(const cshock_params* params, size_t m) {
    if (!params || m >= params->params.products()) return std::numeric_limits<double>::quiet_NaN();
    return params->params.grid.cutoff(m);
}

cshock_status cshock_expected_covariation(const cshock_params* params, size_t k, size_t l, double t_start,
                                          double t_end, double* out) {
    return guard([&] {
        need_out(out);
        *out = cshock::expected_covariation(need(params, "params").params, k, l, t_start, t_end);
    });
}

cshock_status cshock_model_correlation(const cshock_params* params, size_t k, size_t l, double* out) {
    return guard([&] {
        need_out(out);
        *out = cshock::model_correlation(need(params, "params").params, k, l);
    });
}

cshock_status cshock_simulate_to_file(const cshock_params* params, const double* f0, size_t n_f0, const double* times,
                                      size_t n_times, size_t n_paths, uint64_t seed, cshock_generator generator,
                                      cshock_path_format format, const char* path) {
    return guard([&] {
        const auto& p = need(params, "params").params;
        const auto f = to_vector(f0, n_f0, "f0");
        const auto t = to_vector(times, n_times, "times");
        const auto file = need_str(path, "path");
        const cshock::SimConfig config{n_paths, seed, to_generator(generator)};
        if (format != CSHOCK_FORMAT_CSV && format != CSHOCK_FORMAT_BINARY)
            throw cshock::InvalidInput("unknown path format");
        // A zero-path run validates every input before the file is touched.
        cshock::simulate_batch(p, f, t, {0, seed, config.generator}, [](std::size_t, const cshock::GridPath&) {});
        auto out = open_out(file, true);
        if (n_paths > 0) {
            cshock::GridPathWriter writer(out,
                                          format == CSHOCK_FORMAT_CSV ? cshock::GridPathWriter::Format::Csv
                                                                      : cshock::GridPathWriter::Format::Binary,
                                          f, t, n_paths);
            cshock::simulate_batch(p, f, t, config,
                                   [&](std::size_t i, const cshock::GridPath& g) { writer.write(i, g); });
        }
        close_out(out, file);
    });
}

cshock_status cshock_simulate_grid(const cshock_params* params, const double* f0, size_t n_f0, const double* times,
                                   size_t n_times, size_t n_paths, uint64_t seed, cshock_generator generator,
                                   double* prices) {
    return guard([&] {
        const auto& p = need(params, "params").params;
        if (n_paths > 0) need_out(prices);
        const cshock::SimConfig config{n_paths, seed, to_generator(generator)};
        cshock::simulate_batch(p, to_vector(f0, n_f0, "f0"), to_vector(times, n_times, "times"), config,
                               [&](std::size_t i, const cshock::GridPath& g) {
                                   std::copy(g.prices.begin(), g.prices.end(), prices + i * g.prices.size());
                               });
    });
}

cshock_status cshock_synthesize_ticks_to_file(const cshock_params* params, const double* f0, size_t n_f0,
                                              size_t sessions, const char* first_date, uint64_t seed,
                                              const char* ticks_path, const char* spot_path) {
    return guard([&] {
        const auto& p = need(params, "params").params;
        const auto f = to_vector(f0, n_f0, "f0");
        const auto first = cshock::parse_date(need_str(first_date, "first_date"));
        const auto data = cshock::synthesize_ticks(p, f, sessions, first, seed);
        const auto tpath = need_str(ticks_path, "ticks_path");
        auto out = open_out(tpath);
        cshock::write_ticks_csv(data, out);
        close_out(out, tpath);
        if (spot_path) {
            cshock::SpotTable spot;
            for (const auto& s : data.sessions) spot[s.delivery_date] = f;
            auto sout = open_out(spot_path);
            cshock::write_spot_csv(spot, sout);
            close_out(sout, spot_path);
        }
    });
}

cshock_status cshock_ticks_load(const char* path, size_t products, cshock_ticks** out) {
    return guard([&] {
        need_out(out);
        const auto grid = cshock::MaturityGrid::hourly(products == 0 ? 24 : products);
        *out = new cshock_ticks{cshock::load_ticks_csv(need_str(path, "path"), grid)};
    });
}

void cshock_ticks_free(cshock_ticks* ticks) { delete ticks; }

size_t cshock_ticks_sessions(const cshock_ticks* ticks) { return ticks ? ticks->data.sessions.size() : 0; }

size_t cshock_ticks_products(const cshock_ticks* ticks) { return ticks ? ticks->data.products() : 0; }

cshock_status cshock_spot_load(const char* path, size_t products, cshock_spot** out) {
    return guard([&] {
        need_out(out);
        const std::size_t m = products == 0 ? 24 : products;
        *out = new cshock_spot{cshock::load_spot_csv(need_str(path, "path"), m), m};
    });
}

void cshock_spot_free(cshock_spot* spot) { delete spot; }

size_t cshock_spot_days(const cshock_spot* spot) { return spot ? spot->table.size() : 0; }

cshock_status cshock_estimate(const cshock_ticks* ticks, const cshock_windows* windows, int clean_first,
                              cshock_fit** out) {
    return guard([&] {
        need_out(out);
        const auto& data = need(ticks, "ticks").data;
        *out = new cshock_fit{cshock::estimate(data, to_windows(data, windows), clean_first != 0)};
    });
}

void cshock_fit_free(cshock_fit* fit) { delete fit; }

cshock_status cshock_fit_params(const cshock_fit* fit, cshock_params** out) {
    return guard([&] {
        need_out(out);
        *out = new cshock_params{need(fit, "fit").fit.params};
    });
}

cshock_status cshock_fit_write_json(const cshock_fit* fit, const char* path) {
    return guard([&] { write_text(need_str(path, "path"), cshock::fitted_to_json(need(fit, "fit").fit)); });
}

cshock_status cshock_fit_write_cleaning_csv(const cshock_fit* fit, const char* path) {
    return guard([&] {
        const auto& report = need(fit, "fit").fit.cleaning;
        const auto file = need_str(path, "path");
        auto out = open_out(file);
        out << "# units: threshold=EUR/MWh; multiplier=" << report.multiplier << "\n";
        out << "product,returns,removed,removed_fraction,threshold\n";
        for (std::size_t m = 0; m < report.products.size(); ++m) {
            const auto& p = report.products[m];
            out << (m + 1) << ',' << p.total << ',' << p.removed << ',' << p.removed_fraction() << ','
                << p.threshold << '\n';
        }
        close_out(out, file);
    });
}

size_t cshock_fit_warning_count(const cshock_fit* fit) { return fit ? fit->fit.warnings.size() : 0; }

const char* cshock_fit_warning(const cshock_fit* fit, size_t i) {
    return fit ? warning_at(fit->fit.warnings, i) : nullptr;
}

cshock_status cshock_write_signature_csv(const cshock_ticks* ticks, const double* deltas, size_t n_deltas,
                                         const char* path) {
    return guard([&] {
        const auto& data = need(ticks, "ticks").data;
        const auto d = to_vector(deltas, n_deltas, "deltas");
        const auto file = need_str(path, "path");
        std::ostringstream body;
        body.precision(17);
        for (std::size_t m = 0; m < data.products(); ++m)
            for (const auto& pt : cshock::signature_plot(data, m, d))
                body << (m + 1) << ',' << pt.delta << ',' << pt.value << '\n';
        auto out = open_out(file);
        out << "# units: delta_h=hours, rv_per_hour=(EUR/MWh)^2/hour\n";
        out << "product,delta_h,rv_per_hour\n" << body.str();
        close_out(out, file);
    });
}

cshock_status cshock_write_epps_csv(const cshock_ticks* ticks, const cshock_windows* windows, const double* deltas,
                                    size_t n_deltas, const size_t* gaps, size_t n_gaps, const char* path) {
    return guard([&] {
        const auto& data = need(ticks, "ticks").data;
        const auto w = to_windows(data, windows);
        const auto d = to_vector(deltas, n_deltas, "deltas");
        if (n_gaps > 0 && !gaps) throw cshock::InvalidInput("gaps is NULL");
        const auto file = need_str(path, "path");
        std::ostringstream body;
        body.precision(17);
        for (std::size_t g = 0; g < n_gaps; ++g) {
            if (gaps[g] == 0) throw cshock::InvalidInput("Epps gap must be >= 1");
            for (std::size_t l = 0; l + gaps[g] < data.products(); ++l)
                for (double delta : d) {
                    const auto rho = cshock::epps_correlation(data, l, l + gaps[g], delta, w);
                    body << gaps[g] << ',' << (l + 1) << ',' << (l + gaps[g] + 1) << ',' << delta << ',';
                    if (rho) body << *rho;
                    body << '\n';
                }
        }
        auto out = open_out(file);
        out << "# units: delta_h=hours, correlation=dimensionless (empty when undefined)\n";
        out << "gap,product_l,product_m,delta_h,correlation\n" << body.str();
        close_out(out, file);
    });
}

cshock_status cshock_rolling_estimate(const cshock_ticks* ticks, const cshock_windows* windows, int lookback_days,
                                      cshock_rolling** out) {
    return guard([&] {
        need_out(out);
        const auto& data = need(ticks, "ticks").data;
        const auto w = to_windows(data, windows);
        auto r = std::make_unique<cshock_rolling>();
        r->rows = cshock::rolling_estimate(data, w, cshock::weekly_schedule(data, lookback_days), &r->warnings,
                                           lookback_days);
        *out = r.release();
    });
}

cshock_status cshock_rolling_load_json(const char* path, cshock_rolling** out) {
    return guard([&] {
        need_out(out);
        *out = new cshock_rolling{cshock::load_rolling_json(need_str(path, "path")), {}};
    });
}

void cshock_rolling_free(cshock_rolling* rolling) { delete rolling; }

size_t cshock_rolling_rows(const cshock_rolling* rolling) { return rolling ? rolling->rows.size() : 0; }

cshock_status cshock_rolling_write_csv(const cshock_rolling* rolling, const char* path) {
    return guard([&] {
        const auto file = need_str(path, "path");
        auto out = open_out(file);
        cshock::write_rolling_csv(need(rolling, "rolling").rows, out);
        close_out(out, file);
    });
}

cshock_status cshock_rolling_write_json(const cshock_rolling* rolling, const char* path) {
    return guard([&] { write_text(need_str(path, "path"), cshock::rolling_to_json(need(rolling, "rolling").rows)); });
}

size_t cshock_rolling_warning_count(const cshock_rolling* rolling) { return rolling ? rolling->warnings.size() : 0; }

const char* cshock_rolling_warning(const cshock_rolling* rolling, size_t i) {
    return rolling ? warning_at(rolling->warnings, i) : nullptr;
}

cshock_status cshock_value_config_load(const char* path, cshock_battery* battery, size_t* p, size_t* n_paths,
                                       uint64_t* seed) {
    return guard([&] {
        const auto c = cshock::load_value_config(need_str(path, "path"));
        if (battery) *battery = {c.battery.capacity_mwh, c.battery.power_mw, c.battery.efficiency};
        if (p) *p = c.p;
        if (n_paths) *n_paths = c.n_paths;
        if (seed) *seed = c.seed;
    });
}

cshock_status cshock_battery_validate(const cshock_battery* battery) {
    return guard([&] { to_spec(battery); });
}

cshock_status cshock_spot_strategy(const double* prices, size_t n, const cshock_battery* battery, int* controls,
                                   double* value) {
    return guard([&] {
        const auto r = cshock::spot_strategy(to_vector(prices, n, "prices"), to_spec(battery));
        if (controls) std::copy(r.controls.begin(), r.controls.end(), controls);
        if (value) *value = r.value;
    });
}

cshock_status cshock_optimize(const cshock_params* params, const double* f0, size_t n_f0,
                              const cshock_battery* battery, size_t p, cshock_generator generator, size_t n_paths,
                              uint64_t seed, cshock_feature_timing timing, cshock_policy** out) {
    return guard([&] {
        need_out(out);
        auto r = cshock::optimize(need(params, "params").params, to_vector(f0, n_f0, "f0"), to_spec(battery), p,
                                  to_generator(generator), n_paths, seed, to_timing(timing));
        *out = new cshock_policy{std::move(r.policy), r.std_error, std::move(r.warnings)};
    });
}

cshock_status cshock_policy_load(const char* path, cshock_policy** out) {
    return guard([&] {
        need_out(out);
        auto pol = std::make_unique<cshock_policy>();
        pol->policy = cshock::Policy::load(need_str(path, "path"));
        *out = pol.release();
    });
}

cshock_status cshock_policy_save(const cshock_policy* policy, const char* path) {
    return guard([&] { need(policy, "policy").policy.save(need_str(path, "path")); });
}

void cshock_policy_free(cshock_policy* policy) { delete policy; }

double cshock_policy_value(const cshock_policy* policy) {
    return policy ? policy->policy.optimisation_value : std::numeric_limits<double>::quiet_NaN();
}

double cshock_policy_std_error(const cshock_policy* policy) {
    return policy ? policy->std_error : std::numeric_limits<double>::quiet_NaN();
}

size_t cshock_policy_p(const cshock_policy* policy) { return policy ? policy->policy.p : 0; }

size_t cshock_policy_products(const cshock_policy* policy) { return policy ? policy->policy.steps.size() : 0; }

cshock_generator cshock_policy_generator(const cshock_policy* policy) {
    return policy ? static_cast<cshock_generator>(policy->policy.generator) : CSHOCK_GEN_THINNING;
}

uint64_t cshock_policy_params_hash(const cshock_policy* policy) { return policy ? policy->policy.params_hash : 0; }

size_t cshock_policy_warning_count(const cshock_policy* policy) { return policy ? policy->warnings.size() : 0; }

const char* cshock_policy_warning(const cshock_policy* policy, size_t i) {
    return policy ? warning_at(policy->warnings, i) : nullptr;
}

cshock_status cshock_policy_backtest(const cshock_policy* policy, const double* observed, size_t n_products,
                                     int* controls, double* gain) {
    return guard([&] {
        cshock::DecisionPrices d;
        d.products = n_products;
        d.values = to_vector(observed, n_products * n_products, "observed");
        const auto r = cshock::backtest(need(policy, "policy").policy, d);
        if (controls) std::copy(r.controls.begin(), r.controls.end(), controls);
        if (gain) *gain = r.gain;
    });
}

cshock_status cshock_backtest_policy(const cshock_policy* policy, const cshock_ticks* ticks, const cshock_spot* spot,
                                     int with_spot, cshock_report** out) {
    return guard([&] {
        need_out(out);
        *out = new cshock_report{cshock::backtest_policy(need(policy, "policy").policy, need(ticks, "ticks").data,
                                                         need(spot, "spot").table, with_spot != 0)};
    });
}

cshock_status cshock_backtest_campaign(const cshock_ticks* ticks, const cshock_rolling* rolling,
                                       const cshock_spot* spot, const cshock_battery* battery, const size_t* p_list,
                                       size_t n_p, const cshock_generator* generators, size_t n_generators,
                                       size_t n_paths, uint64_t seed, cshock_feature_timing timing, int with_spot,
                                       cshock_report** out) {
    return guard([&] {
        need_out(out);
        cshock::CampaignConfig config;
        if (n_p > 0 && !p_list) throw cshock::InvalidInput("p_list is NULL");
        if (n_generators > 0 && !generators) throw cshock::InvalidInput("generators is NULL");
        config.p_list.assign(p_list, p_list + n_p);
        config.generators.clear();
        for (std::size_t i = 0; i < n_generators; ++i) config.generators.push_back(to_generator(generators[i]));
        config.n_paths = n_paths;
        config.seed = seed;
        config.timing = to_timing(timing);
        config.spot = with_spot != 0;
        *out = new cshock_report{cshock::backtest_campaign(need(ticks, "ticks").data, need(rolling, "rolling").rows,
                                                           need(spot, "spot").table, to_spec(battery), config)};
    });
}

cshock_report* cshock_report_new(void) { return new (std::nothrow) cshock_report{}; }

cshock_status cshock_report_add_daily_csv(cshock_report* report, const char* path) {
    return guard([&] {
        if (!report) throw cshock::InvalidInput("report is NULL");
        const auto file = need_str(path, "path");
        std::ifstream in(file);
        if (!in) throw cshock::IoError("cannot open " + file);
        auto rows = cshock::read_daily_gains_csv(in, file);
        report->report.daily.insert(report->report.daily.end(), rows.begin(), rows.end());
    });
}

void cshock_report_free(cshock_report* report) { delete report; }

size_t cshock_report_days(const cshock_report* report) { return report ? report->report.daily.size() : 0; }

cshock_status cshock_report_write_daily_csv(const cshock_report* report, const char* path) {
    return guard([&] {
        const auto file = need_str(path, "path");
        auto out = open_out(file);
        cshock::write_daily_gains_csv(need(report, "report").report.daily, out);
        close_out(out, file);
    });
}

cshock_status cshock_report_write_annual(const cshock_report* report, cshock_report_format format, const char* path) {
    return guard([&] {
        const auto rows = need(report, "report").report.annual();
        const auto file = need_str(path, "path");
        if (format == CSHOCK_REPORT_JSON) {
            write_text(file, cshock::annual_to_json(rows));
        } else if (format == CSHOCK_REPORT_CSV) {
            auto out = open_out(file);
            cshock::write_annual_csv(rows, out);
            close_out(out, file);
        } else {
            throw cshock::InvalidInput("unknown report format");
        }
    });
}

size_t cshock_report_warning_count(const cshock_report* report) {
    return report ? report->report.warnings.size() : 0;
}

const char* cshock_report_warning(const cshock_report* report, size_t i) {
    return report ? warning_at(report->report.warnings, i) : nullptr;
}

cshock_status cshock_report_optimisation_value(const cshock_report* report, const char* strategy, size_t p,
                                               double* out) {
    return guard([&] {
        need_out(out);
        const auto& values = need(report, "report").report.optimisation_values;
        const auto it = values.find({need_str(strategy, "strategy"), p});
        if (it == values.end()) throw cshock::InvalidInput("no policy trained for that strategy and p");
        *out = it->second;
    });
}

}  // extern "C"
