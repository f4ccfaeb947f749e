// pvariv command line: lagselect / estimate / irf / mc subcommands over the
// C API. Exit codes: 0 success, 2 data or config error, 3 numerical failure.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include "pvariv/pvariv.h"

namespace fs = std::filesystem;

namespace {

struct PanelDeleter {
    void operator()(pvariv_panel* p) const { pvariv_panel_free(p); }
};
struct InstrumentDeleter {
    void operator()(pvariv_instrument* z) const { pvariv_instrument_free(z); }
};
struct ModelDeleter {
    void operator()(pvariv_model* m) const { pvariv_model_free(m); }
};

using PanelPtr = std::unique_ptr<pvariv_panel, PanelDeleter>;
using InstrumentPtr = std::unique_ptr<pvariv_instrument, InstrumentDeleter>;
using ModelPtr = std::unique_ptr<pvariv_model, ModelDeleter>;

struct ApiString {
    char* s = nullptr;
    ~ApiString() { pvariv_string_free(s); }
    const char* get() const { return s != nullptr ? s : ""; }
};

class CliError : public std::runtime_error {
public:
    CliError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
    int code() const { return code_; }

private:
    int code_;
};

void check(pvariv_status st) {
    if (st != PVARIV_OK) throw CliError(st == PVARIV_ERR_DATA ? 2 : 3, pvariv_last_error());
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out.good()) throw CliError(2, "cannot write " + tmp.string());
        out << content;
        if (!out.good()) throw CliError(2, "write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

struct CommonArgs {
    std::string input;
    int growth_k = 1;
    std::string lags = "1";
    double alpha = 0.05;
    int horizon = 8;
    std::string variance = "iid";
    std::string normalization = "unit";
    std::string out_dir = ".";
    std::string instrument = "aggregate";
    std::string policy_var;
    std::string outcome_var;
    double shock = 0.01;
};

void add_data_flags(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--input", a.input, "long-format CSV (unit,time,<vars>...)")->required();
    cmd->add_option("--growth-k", a.growth_k, "growth horizon (1 or 2)")
        ->check(CLI::Range(1, 2))
        ->capture_default_str();
    cmd->add_option("--instrument", a.instrument, "instrument construction")
        ->check(CLI::IsMember({"aggregate", "share"}))
        ->capture_default_str();
    cmd->add_option("--policy-var", a.policy_var,
                    "policy (spending) column; default: first variable column");
    cmd->add_option("--outcome-var", a.outcome_var,
                    "outcome (gdp) column; default: second variable column");
    cmd->add_option("--out", a.out_dir, "output directory")->capture_default_str();
}

pvariv_instrument_mode instrument_mode(const CommonArgs& a) {
    return a.instrument == "share" ? PVARIV_INSTRUMENT_SHARE_WEIGHTED
                                   : PVARIV_INSTRUMENT_AGGREGATE;
}

struct Prepared {
    PanelPtr raw, growth;
    InstrumentPtr z;
};

Prepared prepare(const CommonArgs& a) {
    Prepared p;
    pvariv_panel* raw = nullptr;
    check(pvariv_panel_read_csv(a.input.c_str(), &raw));
    p.raw.reset(raw);
    pvariv_panel* growth = nullptr;
    pvariv_instrument* z = nullptr;
    check(pvariv_prepare_fiscal(p.raw.get(), a.growth_k, instrument_mode(a),
                                a.policy_var.c_str(), a.outcome_var.c_str(), &growth, &z));
    p.growth.reset(growth);
    p.z.reset(z);
    return p;
}

int resolve_lags(const CommonArgs& a, const pvariv_panel* growth) {
    if (a.lags == "auto") {
        int best = 0;
        check(pvariv_lag_select_best(growth, 4, "mbic", &best));
        std::fprintf(stderr, "lag order selected by MBIC: p = %d\n", best);
        return best;
    }
    try {
        const int p = std::stoi(a.lags);
        if (p >= 1) return p;
    } catch (const std::exception&) {
    }
    throw CliError(2, "--lags must be a positive integer or 'auto'");
}

std::string options_json(const CommonArgs& a) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "{\"alpha\":%.17g,\"horizon\":%d,\"shock_size\":%.17g,"
                  "\"normalization\":\"%s\",\"variance\":\"%s\"}",
                  a.alpha, a.horizon, a.shock, a.normalization.c_str(), a.variance.c_str());
    return buf;
}

int cmd_lagselect(const CommonArgs& a, int p_max) {
    const Prepared p = prepare(a);
    ApiString csv;
    check(pvariv_lag_select_csv(p.growth.get(), p_max, &csv.s));
    write_file_atomic(fs::path(a.out_dir) / "lag_selection.csv", csv.get());
    std::printf("wrote %s\n", (fs::path(a.out_dir) / "lag_selection.csv").c_str());
    return 0;
}

int cmd_estimate(const CommonArgs& a) {
    const Prepared p = prepare(a);
    const int lags = resolve_lags(a, p.growth.get());

    pvariv_model* model = nullptr;
    check(pvariv_fit(p.growth.get(), lags, &model));
    ModelPtr mp(model);

    const std::string opts = options_json(a);
    ApiString model_json, iv_json, table2, table3, diagnostics;
    check(pvariv_model_to_json(mp.get(), &model_json.s));
    check(pvariv_identify_json(mp.get(), p.z.get(), opts.c_str(), &iv_json.s));
    check(pvariv_estimate_tables(mp.get(), p.z.get(), opts.c_str(), &table2.s, &table3.s,
                                 &diagnostics.s));

    const fs::path dir(a.out_dir);
    write_file_atomic(dir / "model.json", model_json.get());
    write_file_atomic(dir / "iv_estimate.json", iv_json.get());
    write_file_atomic(dir / "table2.csv", table2.get());
    write_file_atomic(dir / "table3.csv", table3.get());
    write_file_atomic(dir / "diagnostics.csv", diagnostics.get());
    std::printf("wrote model.json, iv_estimate.json, table2.csv, table3.csv, diagnostics.csv in %s\n",
                dir.c_str());
    return 0;
}

int cmd_irf(const CommonArgs& a) {
    const Prepared p = prepare(a);
    const int lags = resolve_lags(a, p.growth.get());

    pvariv_model* model = nullptr;
    check(pvariv_fit(p.growth.get(), lags, &model));
    ModelPtr mp(model);

    ApiString csv;
    check(pvariv_irf_csv(mp.get(), p.z.get(), options_json(a).c_str(), &csv.s));
    write_file_atomic(fs::path(a.out_dir) / "irf.csv", csv.get());
    std::printf("wrote %s\n", (fs::path(a.out_dir) / "irf.csv").c_str());
    return 0;
}

int cmd_mc(const std::string& config, long long seed, const std::string& out_dir) {
    ApiString csv, summary;
    check(pvariv_mc_run_file(config.c_str(), seed, &csv.s, &summary.s));
    write_file_atomic(fs::path(out_dir) / "mc_report.csv", csv.get());
    write_file_atomic(fs::path(out_dir) / "mc_summary.json", summary.get());
    std::printf("wrote mc_report.csv, mc_summary.json in %s\n", out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Panel SVAR identification via external instruments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(pvariv_version()));

    CommonArgs largs, eargs, iargs;

    auto* lag = app.add_subcommand("lagselect", "information criteria for lag order selection");
    add_data_flags(lag, largs);
    int p_max = 4;
    lag->add_option("--lags", p_max, "largest candidate lag order")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    auto* est = app.add_subcommand("estimate", "fit the PVAR, identify, and diagnose");
    add_data_flags(est, eargs);
    est->add_option("--lags", eargs.lags, "lag order, or 'auto' (MBIC)")->capture_default_str();
    est->add_option("--alpha", eargs.alpha, "test level")->capture_default_str();
    est->add_option("--variance", eargs.variance, "variance estimator")
        ->check(CLI::IsMember({"iid", "cluster"}))
        ->capture_default_str();
    est->add_option("--normalization", eargs.normalization, "shock normalization")
        ->check(CLI::IsMember({"unit", "standardized"}))
        ->capture_default_str();

    auto* irf = app.add_subcommand("irf", "impulse responses with AR confidence sets");
    add_data_flags(irf, iargs);
    irf->add_option("--lags", iargs.lags, "lag order, or 'auto' (MBIC)")->capture_default_str();
    irf->add_option("--alpha", iargs.alpha, "test level")->capture_default_str();
    irf->add_option("--horizon", iargs.horizon, "largest IRF horizon")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    irf->add_option("--shock", iargs.shock, "shock size (0.01 = a 1% shock)")
        ->capture_default_str();
    irf->add_option("--variance", iargs.variance, "variance estimator")
        ->check(CLI::IsMember({"iid", "cluster"}))
        ->capture_default_str();
    irf->add_option("--normalization", iargs.normalization, "shock normalization")
        ->check(CLI::IsMember({"unit", "standardized"}))
        ->capture_default_str();

    auto* mc = app.add_subcommand("mc", "Monte Carlo coverage experiment");
    std::string mc_config;
    std::string mc_out = ".";
    long long mc_seed = -1;
    mc->add_option("--config", mc_config, "McConfig file (.toml or .json)")->required();
    mc->add_option("--seed", mc_seed, "master seed override")->capture_default_str();
    mc->add_option("--out", mc_out, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (lag->parsed()) return cmd_lagselect(largs, p_max);
        if (est->parsed()) return cmd_estimate(eargs);
        if (irf->parsed()) return cmd_irf(iargs);
        if (mc->parsed()) return cmd_mc(mc_config, mc_seed, mc_out);
    } catch (const CliError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.code();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 2;
}
