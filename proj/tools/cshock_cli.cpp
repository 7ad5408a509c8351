#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cshock/cshock.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitInternal = 1;

struct Failure {
    cshock_status status;
    std::string message;
};

int exit_code(cshock_status s) {
    switch (s) {
        case CSHOCK_ERR_INVALID_INPUT:
        case CSHOCK_ERR_IO: return kExitInput;
        case CSHOCK_ERR_NUMERICAL: return kExitNumerical;
        default: return kExitInternal;
    }
}

void check(cshock_status s) {
    if (s != CSHOCK_OK) throw Failure{s, cshock_last_error()};
}

[[noreturn]] void input_error(const std::string& msg) { throw Failure{CSHOCK_ERR_INVALID_INPUT, msg}; }

template <class T, void (*Free)(T*)>
struct Handle {
    T* ptr = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Free(ptr); }
    T** out() { return &ptr; }
    T* get() const { return ptr; }
};

using Params = Handle<cshock_params, cshock_params_free>;
using Ticks = Handle<cshock_ticks, cshock_ticks_free>;
using Spot = Handle<cshock_spot, cshock_spot_free>;
using Fit = Handle<cshock_fit, cshock_fit_free>;
using Rolling = Handle<cshock_rolling, cshock_rolling_free>;
using Policy = Handle<cshock_policy, cshock_policy_free>;
using Report = Handle<cshock_report, cshock_report_free>;

void warn(const std::string& msg) { std::cerr << json{{"warning", msg}}.dump() << '\n'; }

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Manifest {
    json doc;

    explicit Manifest(const std::string& subcommand) {
        doc["subcommand"] = subcommand;
        doc["tool_version"] = cshock_version();
        doc["inputs"] = json::array();
        doc["outputs"] = json::array();
        doc["params_hash"] = nullptr;
        doc["master_seed"] = nullptr;
    }
    void input(const std::string& path) { doc["inputs"].push_back(path); }
    void output(const std::string& path) { doc["outputs"].push_back(path); }
    void write(const std::string& path) {
        doc["thread_count"] = cshock_threads();
        doc["wall_clock_utc"] = utc_now();
        std::ofstream out(path);
        if (!out) throw Failure{CSHOCK_ERR_IO, "cannot write " + path};
        out << doc.dump(2) << '\n';
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Failure{CSHOCK_ERR_IO, "cannot open " + path};
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// A number gives a flat curve; anything else is a JSON array file.
std::vector<double> load_f0(const std::string& spec, std::size_t products) {
    std::vector<double> f0;
    std::size_t used = 0;
    try {
        const double v = std::stod(spec, &used);
        if (used == spec.size()) return std::vector<double>(products, v);
    } catch (const std::logic_error&) {
    }
    try {
        f0 = json::parse(read_file(spec)).get<std::vector<double>>();
    } catch (const json::exception& e) {
        input_error(spec + ": f0 must be a JSON array of prices: " + e.what());
    }
    if (f0.size() != products)
        input_error(spec + ": expected " + std::to_string(products) + " initial prices, got " +
                    std::to_string(f0.size()));
    return f0;
}

std::vector<double> parse_grid(const std::string& spec, const cshock_params* params) {
    const std::size_t M = cshock_params_products(params);
    std::vector<double> times;
    if (spec == "decision") {
        for (std::size_t m = 0; m < M; ++m) times.push_back(cshock_params_cutoff(params, m));
        return times;
    }
    if (spec.rfind("step:", 0) == 0) {
        double h = 0.0;
        try {
            h = std::stod(spec.substr(5));
        } catch (const std::logic_error&) {
            input_error("--grid step:<hours> needs a number");
        }
        if (!(h > 0.0)) input_error("--grid step must be positive");
        const double end = cshock_params_cutoff(params, M - 1);
        for (std::size_t k = 0; k * h <= end + 1e-12; ++k) times.push_back(static_cast<double>(k) * h);
        return times;
    }
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            times.push_back(std::stod(item));
        } catch (const std::logic_error&) {
            input_error("--grid: '" + item + "' is not a number");
        }
    }
    return times;
}

cshock_generator parse_gen(const std::string& name) {
    cshock_generator g;
    check(cshock_parse_generator(name.c_str(), &g));
    return g;
}

cshock_feature_timing parse_timing(const std::string& s) {
    if (s == "decision") return CSHOCK_FEATURES_AT_DECISION;
    if (s == "next-decision") return CSHOCK_FEATURES_AT_NEXT_DECISION;
    input_error("--features must be decision or next-decision");
}

cshock_windows load_windows(const std::string& path, double delta, double small_delta, std::vector<double>& begin,
                            std::vector<double>& end) {
    cshock_windows w{nullptr, nullptr, 0, delta, small_delta};
    if (path.empty()) return w;
    try {
        const auto j = json::parse(read_file(path));
        begin = j.at("begin").get<std::vector<double>>();
        end = j.at("end").get<std::vector<double>>();
    } catch (const json::exception& e) {
        input_error(path + ": windows file needs begin and end arrays: " + e.what());
    }
    if (begin.size() != end.size()) input_error(path + ": begin and end differ in length");
    w.begin = begin.data();
    w.end = end.data();
    w.n = begin.size();
    return w;
}

fs::path ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Failure{CSHOCK_ERR_IO, "cannot create directory " + dir + ": " + ec.message()};
    return fs::path(dir);
}

// ---- simulate ----

struct SimulateArgs {
    std::string params;
    std::size_t n_paths = 1000;
    std::uint64_t seed = 0;
    std::string generator = "thinning";
    std::string grid = "decision";
    std::string format = "csv";
    std::string f0 = "50";
    std::string out;
    std::size_t sessions = 28;
    std::string first_date = "2022-01-03";
    std::string spot_out;
};

void run_simulate(const SimulateArgs& a) {
    Params params;
    check(cshock_params_load(a.params.c_str(), params.out()));
    const std::size_t M = cshock_params_products(params.get());
    const auto f0 = load_f0(a.f0, M);
    const auto gen = parse_gen(a.generator);
    Manifest manifest("simulate");
    manifest.input(a.params);
    manifest.doc["params_hash"] = hex64(cshock_params_hash(params.get()));
    manifest.doc["master_seed"] = a.seed;
    manifest.doc["generator"] = a.generator;
    manifest.doc["format"] = a.format;
    manifest.doc["f0"] = f0;
    if (a.format == "ticks") {
        if (gen != CSHOCK_GEN_THINNING) input_error("--format ticks uses the thinning generator");
        const std::string spot = a.spot_out.empty() ? a.out + ".spot.csv" : a.spot_out;
        check(cshock_synthesize_ticks_to_file(params.get(), f0.data(), f0.size(), a.sessions, a.first_date.c_str(),
                                              a.seed, a.out.c_str(), spot.c_str()));
        manifest.doc["sessions"] = a.sessions;
        manifest.doc["first_date"] = a.first_date;
        manifest.output(a.out);
        manifest.output(spot);
    } else {
        cshock_path_format fmt;
        if (a.format == "csv")
            fmt = CSHOCK_FORMAT_CSV;
        else if (a.format == "binary")
            fmt = CSHOCK_FORMAT_BINARY;
        else
            input_error("--format must be csv, binary or ticks");
        const auto times = parse_grid(a.grid, params.get());
        check(cshock_simulate_to_file(params.get(), f0.data(), f0.size(), times.data(), times.size(), a.n_paths,
                                      a.seed, gen, fmt, a.out.c_str()));
        manifest.doc["n_paths"] = a.n_paths;
        manifest.doc["grid_times_h"] = times;
        manifest.output(a.out);
    }
    manifest.write(a.out + ".manifest.json");
}

// ---- estimate ----

struct EstimateArgs {
    std::string ticks;
    std::string windows;
    double delta = 0.5;
    double small_delta = 1.0;
    std::string rolling = "none";
    int lookback = 28;
    std::size_t products = 24;
    bool no_clean = false;
    std::string out = "estimate";
};

void run_estimate(const EstimateArgs& a) {
    if (a.rolling != "none" && a.rolling != "weekly") input_error("--rolling must be weekly or none");
    Ticks ticks;
    check(cshock_ticks_load(a.ticks.c_str(), a.products, ticks.out()));
    std::vector<double> begin, end;
    const cshock_windows w = load_windows(a.windows, a.delta, a.small_delta, begin, end);
    const fs::path dir = ensure_dir(a.out);
    Manifest manifest("estimate");
    manifest.input(a.ticks);
    if (!a.windows.empty()) manifest.input(a.windows);
    manifest.doc["delta_h"] = a.delta;
    manifest.doc["small_delta_h"] = a.small_delta;
    manifest.doc["rolling"] = a.rolling;
    manifest.doc["cleaning"] = !a.no_clean;

    Fit fit;
    check(cshock_estimate(ticks.get(), &w, a.no_clean ? 0 : 1, fit.out()));
    for (std::size_t i = 0; i < cshock_fit_warning_count(fit.get()); ++i) warn(cshock_fit_warning(fit.get(), i));
    Params params;
    check(cshock_fit_params(fit.get(), params.out()));
    manifest.doc["params_hash"] = hex64(cshock_params_hash(params.get()));

    const auto out = [&](const char* name) {
        const std::string p = (dir / name).string();
        manifest.output(p);
        return p;
    };
    check(cshock_fit_write_json(fit.get(), out("params.json").c_str()));
    check(cshock_fit_write_cleaning_csv(fit.get(), out("cleaning.csv").c_str()));
    const std::vector<double> deltas{1.0 / 60, 2.0 / 60, 5.0 / 60, 10.0 / 60, 0.25, 0.5, 1.0, 2.0};
    check(cshock_write_signature_csv(ticks.get(), deltas.data(), deltas.size(), out("signature.csv").c_str()));
    const std::vector<std::size_t> gaps{1, 2, 4};
    check(cshock_write_epps_csv(ticks.get(), &w, deltas.data(), deltas.size(), gaps.data(), gaps.size(),
                                out("epps.csv").c_str()));
    if (a.rolling == "weekly") {
        Rolling rolling;
        check(cshock_rolling_estimate(ticks.get(), &w, a.lookback, rolling.out()));
        for (std::size_t i = 0; i < cshock_rolling_warning_count(rolling.get()); ++i)
            warn(cshock_rolling_warning(rolling.get(), i));
        check(cshock_rolling_write_csv(rolling.get(), out("rolling.csv").c_str()));
        check(cshock_rolling_write_json(rolling.get(), out("rolling.json").c_str()));
        manifest.doc["rolling_rows"] = cshock_rolling_rows(rolling.get());
    }
    manifest.write((dir / "manifest.json").string());
}

// ---- value ----

struct ValueArgs {
    std::string params;
    std::string battery;
    std::size_t p = 0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string generator = "thinning";
    std::string features = "decision";
    std::string f0 = "50";
    std::string out = "policy.bin";
};

void run_value(const ValueArgs& a) {
    Params params;
    check(cshock_params_load(a.params.c_str(), params.out()));
    cshock_battery battery;
    std::size_t p = 0, n_paths = 0;
    std::uint64_t seed = 0;
    check(cshock_value_config_load(a.battery.c_str(), &battery, &p, &n_paths, &seed));
    if (a.p != 0) p = a.p;
    if (a.n_paths != 0) n_paths = a.n_paths;
    if (a.seed_given) seed = a.seed;
    if (p < 1 || p > 6) input_error("p must lie in 1..6, got " + std::to_string(p));
    const auto f0 = load_f0(a.f0, cshock_params_products(params.get()));
    const auto gen = parse_gen(a.generator);
    Policy policy;
    check(cshock_optimize(params.get(), f0.data(), f0.size(), &battery, p, gen, n_paths, seed,
                          parse_timing(a.features), policy.out()));
    for (std::size_t i = 0; i < cshock_policy_warning_count(policy.get()); ++i)
        warn(cshock_policy_warning(policy.get(), i));
    check(cshock_policy_save(policy.get(), a.out.c_str()));

    json report{{"units", {{"optimisation_value", "EUR per session"}, {"std_error", "EUR"}}},
                {"optimisation_value", cshock_policy_value(policy.get())},
                {"std_error", cshock_policy_std_error(policy.get())},
                {"p", p},
                {"n_paths", n_paths},
                {"generator", a.generator},
                {"features", a.features},
                {"battery",
                 {{"capacity_mwh", battery.capacity_mwh},
                  {"power_mw", battery.power_mw},
                  {"efficiency", battery.efficiency}}}};
    const std::string report_path = a.out + ".json";
    std::ofstream rout(report_path);
    if (!rout) throw Failure{CSHOCK_ERR_IO, "cannot write " + report_path};
    rout << report.dump(2) << '\n';
    rout.close();

    Manifest manifest("value");
    manifest.input(a.params);
    manifest.input(a.battery);
    manifest.doc["params_hash"] = hex64(cshock_params_hash(params.get()));
    manifest.doc["master_seed"] = seed;
    manifest.output(a.out);
    manifest.output(report_path);
    manifest.write(a.out + ".manifest.json");
    std::cout << report.dump(2) << '\n';
}

// ---- backtest / campaign ----

void write_report_outputs(const cshock_report* report, const fs::path& dir, Manifest& manifest) {
    for (std::size_t i = 0; i < cshock_report_warning_count(report); ++i) warn(cshock_report_warning(report, i));
    const std::string daily = (dir / "daily_gains.csv").string();
    const std::string annual = (dir / "annual.csv").string();
    check(cshock_report_write_daily_csv(report, daily.c_str()));
    check(cshock_report_write_annual(report, CSHOCK_REPORT_CSV, annual.c_str()));
    manifest.output(daily);
    manifest.output(annual);
    manifest.doc["days"] = cshock_report_days(report);
    manifest.write((dir / "manifest.json").string());
}

struct BacktestArgs {
    std::string policy;
    std::string ticks;
    std::string spot;
    bool no_spot = false;
    std::string out = "backtest";
};

void run_backtest(const BacktestArgs& a) {
    Policy policy;
    check(cshock_policy_load(a.policy.c_str(), policy.out()));
    const std::size_t M = cshock_policy_products(policy.get());
    Ticks ticks;
    check(cshock_ticks_load(a.ticks.c_str(), M, ticks.out()));
    Spot spot;
    check(cshock_spot_load(a.spot.c_str(), M, spot.out()));
    Report report;
    check(cshock_backtest_policy(policy.get(), ticks.get(), spot.get(), a.no_spot ? 0 : 1, report.out()));
    const fs::path dir = ensure_dir(a.out);
    Manifest manifest("backtest");
    manifest.input(a.policy);
    manifest.input(a.ticks);
    manifest.input(a.spot);
    manifest.doc["params_hash"] = hex64(cshock_policy_params_hash(policy.get()));
    write_report_outputs(report.get(), dir, manifest);
}

struct CampaignArgs {
    std::string ticks;
    std::string spot;
    std::string rolling;
    std::string battery;
    std::vector<std::size_t> p_list{1, 3, 5};
    std::vector<std::string> generators{"thinning", "diffusion"};
    std::size_t n_paths = 50000;
    std::uint64_t seed = 0;
    std::string features = "decision";
    bool no_spot = false;
    std::string out = "campaign";
};

void run_campaign(const CampaignArgs& a) {
    Ticks ticks;
    check(cshock_ticks_load(a.ticks.c_str(), 0, ticks.out()));
    Spot spot;
    check(cshock_spot_load(a.spot.c_str(), cshock_ticks_products(ticks.get()), spot.out()));
    Rolling rolling;
    check(cshock_rolling_load_json(a.rolling.c_str(), rolling.out()));
    cshock_battery battery;
    check(cshock_value_config_load(a.battery.c_str(), &battery, nullptr, nullptr, nullptr));
    for (auto p : a.p_list)
        if (p < 1 || p > 6) input_error("p must lie in 1..6, got " + std::to_string(p));
    std::vector<cshock_generator> gens;
    for (const auto& g : a.generators) gens.push_back(parse_gen(g));
    Report report;
    check(cshock_backtest_campaign(ticks.get(), rolling.get(), spot.get(), &battery, a.p_list.data(), a.p_list.size(),
                                   gens.data(), gens.size(), a.n_paths, a.seed, parse_timing(a.features),
                                   a.no_spot ? 0 : 1, report.out()));
    const fs::path dir = ensure_dir(a.out);
    Manifest manifest("campaign");
    manifest.input(a.ticks);
    manifest.input(a.spot);
    manifest.input(a.rolling);
    manifest.input(a.battery);
    manifest.doc["master_seed"] = a.seed;
    manifest.doc["n_paths"] = a.n_paths;
    manifest.doc["p_list"] = a.p_list;
    manifest.doc["generators"] = a.generators;
    write_report_outputs(report.get(), dir, manifest);
}

// ---- report ----

struct ReportArgs {
    std::vector<std::string> inputs;
    std::string format = "csv";
    std::string out = "-";
};

void run_report(const ReportArgs& a) {
    cshock_report_format fmt;
    if (a.format == "csv")
        fmt = CSHOCK_REPORT_CSV;
    else if (a.format == "json")
        fmt = CSHOCK_REPORT_JSON;
    else
        input_error("--format must be csv or json");
    Report report;
    report.ptr = cshock_report_new();
    if (!report.get()) throw Failure{CSHOCK_ERR_INTERNAL, "out of memory"};
    for (const auto& in : a.inputs) check(cshock_report_add_daily_csv(report.get(), in.c_str()));
    const std::string target = a.out == "-" ? "/dev/stdout" : a.out;
    check(cshock_report_write_annual(report.get(), fmt, target.c_str()));
    if (a.out != "-") {
        Manifest manifest("report");
        for (const auto& in : a.inputs) manifest.input(in);
        manifest.output(a.out);
        manifest.write(a.out + ".manifest.json");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Common-shock intraday electricity price model: simulate, estimate, value, backtest, report"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(cshock_version()));
    std::size_t threads = 0;
    app.add_option("--threads", threads, "Worker threads (0 = all cores); results do not depend on it");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Simulate price paths or synthetic tick sessions");
    simulate->add_option("params", sim.params, "Model parameters JSON")->required()->check(CLI::ExistingFile);
    simulate->add_option("--n-paths", sim.n_paths, "Number of paths");
    simulate->add_option("--seed", sim.seed, "Master seed");
    simulate->add_option("--generator", sim.generator, "thinning | decomposition | diffusion");
    simulate->add_option("--grid", sim.grid, "decision | step:<hours> | comma-separated session hours");
    simulate->add_option("--format", sim.format, "csv | binary | ticks");
    simulate->add_option("--f0", sim.f0, "Initial prices: a number or a JSON array file (EUR/MWh)");
    simulate->add_option("--sessions", sim.sessions, "Sessions for --format ticks");
    simulate->add_option("--first-date", sim.first_date, "First delivery date for --format ticks");
    simulate->add_option("--spot-out", sim.spot_out, "Spot CSV for --format ticks (default <out>.spot.csv)");
    simulate->add_option("--out", sim.out, "Output file")->required();

    EstimateArgs est;
    auto* estimate = app.add_subcommand("estimate", "Estimate model parameters from tick data");
    estimate->add_option("ticks", est.ticks, "Tick CSV")->required()->check(CLI::ExistingFile);
    estimate->add_option("--windows", est.windows, "JSON {begin:[...], end:[...]} in session hours");
    estimate->add_option("--delta", est.delta, "Sampling step, hours");
    estimate->add_option("--small-delta", est.small_delta, "Minimum pair overlap, hours");
    estimate->add_option("--rolling", est.rolling, "weekly | none");
    estimate->add_option("--lookback", est.lookback, "Rolling lookback, days");
    estimate->add_option("--products", est.products, "Hourly products per session");
    estimate->add_flag("--no-clean", est.no_clean, "Skip outlier cleaning");
    estimate->add_option("--out", est.out, "Output directory");

    ValueArgs val;
    auto* value = app.add_subcommand("value", "Train a battery policy on simulated paths");
    value->add_option("params", val.params, "Model parameters JSON")->required()->check(CLI::ExistingFile);
    value->add_option("battery", val.battery, "Battery JSON")->required()->check(CLI::ExistingFile);
    value->add_option("--p", val.p, "Forward prices used as features (1..6)");
    value->add_option("--n-paths", val.n_paths, "Training paths");
    auto* seed_opt = value->add_option("--seed", val.seed, "Master seed");
    value->add_option("--generator", val.generator, "thinning | decomposition | diffusion");
    value->add_option("--features", val.features, "decision | next-decision");
    value->add_option("--f0", val.f0, "Initial prices: a number or a JSON array file (EUR/MWh)");
    value->add_option("--out", val.out, "Policy file");

    BacktestArgs bt;
    auto* backtest = app.add_subcommand("backtest", "Apply a policy to observed sessions");
    backtest->add_option("policy", bt.policy, "Policy file")->required()->check(CLI::ExistingFile);
    backtest->add_option("ticks", bt.ticks, "Tick CSV")->required()->check(CLI::ExistingFile);
    backtest->add_option("spot", bt.spot, "Spot CSV")->required()->check(CLI::ExistingFile);
    backtest->add_flag("--no-spot", bt.no_spot, "Skip the spot strategy");
    backtest->add_option("--out", bt.out, "Output directory");

    CampaignArgs camp;
    auto* campaign = app.add_subcommand("campaign", "Daily retraining backtest driven by weekly estimates");
    campaign->add_option("ticks", camp.ticks, "Tick CSV")->required()->check(CLI::ExistingFile);
    campaign->add_option("spot", camp.spot, "Spot CSV")->required()->check(CLI::ExistingFile);
    campaign->add_option("--rolling", camp.rolling, "rolling.json from estimate --rolling weekly")
        ->required()
        ->check(CLI::ExistingFile);
    campaign->add_option("--battery", camp.battery, "Battery JSON")->required()->check(CLI::ExistingFile);
    campaign->add_option("--p", camp.p_list, "Feature counts")->delimiter(',');
    campaign->add_option("--generators", camp.generators, "Training generators")->delimiter(',');
    campaign->add_option("--n-paths", camp.n_paths, "Training paths per policy");
    campaign->add_option("--seed", camp.seed, "Master seed");
    campaign->add_option("--features", camp.features, "decision | next-decision");
    campaign->add_flag("--no-spot", camp.no_spot, "Skip the spot strategy");
    campaign->add_option("--out", camp.out, "Output directory");

    ReportArgs rep;
    auto* report = app.add_subcommand("report", "Annual (year, p, spot, poisson, diffusion) table from daily gains");
    report->add_option("inputs", rep.inputs, "daily_gains.csv files");
    report->add_option("--format", rep.format, "csv | json");
    report->add_option("--out", rep.out, "Output file, - for stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << json{{"error", {{"code", "usage"}, {"message", e.what()}, {"exit_code", kExitInput}}}}.dump()
                  << '\n';
        return kExitInput;
    }

    try {
        cshock_set_threads(threads);
        if (*simulate) run_simulate(sim);
        if (*estimate) run_estimate(est);
        if (*value) {
            val.seed_given = seed_opt->count() > 0;
            run_value(val);
        }
        if (*backtest) run_backtest(bt);
        if (*campaign) run_campaign(camp);
        if (*report) run_report(rep);
    } catch (const Failure& f) {
        const int code = exit_code(f.status);
        std::cerr << json{{"error",
                           {{"code", cshock_status_name(f.status)}, {"message", f.message}, {"exit_code", code}}}}
                         .dump()
                  << '\n';
        return code;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", {{"code", "internal"}, {"message", e.what()}, {"exit_code", kExitInternal}}}}
                         .dump()
                  << '\n';
        return kExitInternal;
    }
    return 0;
}
