// fbmclt: command-line front end for the CLT verification toolkit.
//
// Subcommands: constants | simulate | oracle | clt-moments | lln | tightness | ks
// Exit codes:  0 success, 2 config error, 3 numerical error,
//              4 pinned acceptance rule failed under --check.

#include "fbmclt/constants.hpp"
#include "fbmclt/csv.hpp"
#include "fbmclt/errors.hpp"
#include "fbmclt/experiments.hpp"
#include "fbmclt/fbm.hpp"
#include "fbmclt/moments.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

using nlohmann::json;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    bool check = false;
};

void add_common(CLI::App* sub, CommonArgs& args, bool config_required) {
    auto* config = sub->add_option("--config", args.config_path, "JSON experiment config")
                       ->check(CLI::ExistingFile);
    if (config_required) config->required();
    sub->add_option("--out", args.out_dir, "output directory (overrides config)");
    sub->add_option("--seed", args.seed, "master seed (overrides config)");
    sub->add_option("--threads", args.threads, "worker threads (overrides config)");
    sub->add_flag("--check", args.check, "exit 4 unless the pinned acceptance rule passes");
}

fbmclt::ExperimentConfig load_config(const CommonArgs& args) {
    fbmclt::ExperimentConfig cfg =
        fbmclt::parse_experiment_config(fbmclt::read_text_file(args.config_path));
    if (args.seed) cfg.seed = *args.seed;
    if (args.threads) {
        if (*args.threads < 1) throw fbmclt::config_error("--threads must be >= 1");
        cfg.threads = *args.threads;
    }
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    return cfg;
}

int finish_run(const fbmclt::Report& rep, const fbmclt::ExperimentConfig& cfg, bool check) {
    fbmclt::emit_report(rep, cfg.out_dir);
    std::cout << rep.check_summary << "\n";
    for (const auto& [name, bytes] : rep.tables)
        std::cout << "wrote " << cfg.out_dir << "/" << name << " (" << bytes.size()
                  << " bytes)\n";
    std::cout << "wrote " << cfg.out_dir << "/manifest.json\n";
    if (check && !rep.passed) {
        std::cerr << "check failed: " << rep.check_summary << "\n";
        return 4;
    }
    return 0;
}

int run_constants(double hurst, int dim, std::optional<double> beta_opt, bool as_json) {
    const fbmclt::HurstModel model(hurst, dim);
    json out;
    out["hurst"] = hurst;
    out["dim"] = dim;
    out["regime"] = model.clt_regime();
    if (model.clt_regime()) {
        const auto closed = fbmclt::chd_closed_form(model);
        const auto quad = fbmclt::chd_quadrature(model);
        const double beta = beta_opt ? *beta_opt : 1.0 / hurst - dim;
        out["chd_closed"] = closed.value;
        out["chd_quad"] = quad.value;
        out["abs_err"] = std::fabs(closed.value - quad.value);
        out["beta"] = beta;
        out["riesz_c"] = fbmclt::riesz_constant(beta, dim);
    } else {
        // outside 1/(d+2) < H < 1/d the constant is not finite; report the
        // regime verdict instead of failing
        out["chd_closed"] = nullptr;
        out["chd_quad"] = nullptr;
        out["abs_err"] = nullptr;
        out["beta"] = nullptr;
        out["riesz_c"] = nullptr;
    }
    if (as_json) {
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "H=" << hurst << " d=" << dim
                  << " clt_regime=" << (model.clt_regime() ? "yes" : "no") << "\n";
        if (model.clt_regime())
            std::cout << "  C_{H,d} closed form: "
                      << fbmclt::format_full(out["chd_closed"].get<double>())
                      << "\n  C_{H,d} quadrature:  "
                      << fbmclt::format_full(out["chd_quad"].get<double>())
                      << "\n  |difference|:        "
                      << fbmclt::format_full(out["abs_err"].get<double>())
                      << "\n  riesz c(beta=" << out["beta"].get<double>()
                      << "): " << fbmclt::format_full(out["riesz_c"].get<double>()) << "\n";
    }
    return 0;
}

int run_simulate(const CommonArgs& args, std::int64_t steps, double dt, int paths) {
    fbmclt::ExperimentConfig cfg = load_config(args);
    if (steps < 1 || paths < 1 || !(dt > 0.0))
        throw fbmclt::config_error("simulate: need steps >= 1, paths >= 1, dt > 0");

    const fbmclt::FbmSampler sampler(cfg.model, fbmclt::TimeGrid(dt, steps));
    fbmclt::Report rep;
    fbmclt::FbmPath a, b;
    for (int k = 0; k < paths; k += 2) {
        fbmclt::RngStream rng(cfg.seed,
                              fbmclt::substream(fbmclt::kStageSimulate,
                                                static_cast<std::uint64_t>(k / 2)));
        sampler.sample_pair(rng, a, b);
        for (int half = 0; half < 2 && k + half < paths; ++half) {
            std::ostringstream os;
            fbmclt::write_path_csv(os, half ? b : a);
            rep.tables.emplace_back("path_" + std::to_string(k + half) + ".csv", os.str());
        }
    }
    json results{{"experiment", "simulate"},
                 {"steps", steps},
                 {"dt", dt},
                 {"paths", paths},
                 {"method", sampler.method() == fbmclt::SamplerMethod::cholesky ? "cholesky"
                                                                                : "circulant"}};
    rep.results_json = results.dump(2);
    rep.config_json = fbmclt::config_to_json(cfg);
    rep.stages = {{"paths", fbmclt::kStageSimulate}};
    rep.check_summary = "simulated " + std::to_string(paths) + " path(s), " +
                        std::to_string(steps) + " steps, dt=" + fbmclt::format_full(dt);
    return finish_run(rep, cfg, args.check);
}

int run_oracle(const CommonArgs& args, bool scaled) {
    fbmclt::ExperimentConfig cfg = load_config(args);
    if (cfg.moments.empty())
        throw fbmclt::config_error("oracle: config needs intervals/multi_index (or moments)");
    const fbmclt::MomentSpec& spec = cfg.moments.front();
    const fbmclt::MomentEstimate est =
        scaled ? fbmclt::clt_moment_target(spec, cfg.model, cfg.test_function(),
                                           cfg.oracle_samples, cfg.seed,
                                           fbmclt::kStageOracleBase, cfg.threads)
               : fbmclt::limit_moment(spec, cfg.model, cfg.oracle_samples, cfg.seed,
                                      fbmclt::kStageOracleBase, cfg.threads);
    json out{{"value", est.value},
             {"stderr", est.stderr_},
             {"samples", est.samples},
             {"exact", est.exact},
             {"m_spec", fbmclt::moment_spec_label(spec)},
             {"scaled", scaled}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fractional Brownian motion additive-functional CLT toolkit"};
    app.require_subcommand(1);

    CommonArgs common;

    // constants
    double hurst = 0.0;
    int dim = 1;
    std::optional<double> beta_opt;
    bool constants_json = false;
    auto* c_const = app.add_subcommand("constants", "limit constants C_{H,d} and c_{beta,d}");
    c_const->add_option("--hurst", hurst, "Hurst index in (0,1)")->required();
    c_const->add_option("--dim", dim, "spatial dimension")->required();
    c_const->add_option("--beta", beta_opt, "Riesz exponent (default 1/H - d)");
    c_const->add_flag("--json", constants_json, "emit JSON");

    // simulate
    std::int64_t steps = 1024;
    double dt = 1.0;
    int n_paths = 1;
    auto* c_sim = app.add_subcommand("simulate", "sample fBm paths to CSV");
    add_common(c_sim, common, true);
    c_sim->add_option("--steps", steps, "grid steps per path");
    c_sim->add_option("--dt", dt, "grid spacing");
    c_sim->add_option("--paths", n_paths, "number of paths");

    // oracle
    bool oracle_scaled = false;
    auto* c_oracle = app.add_subcommand("oracle", "limit-moment Monte Carlo oracle");
    add_common(c_oracle, common, true);
    c_oracle->add_flag("--scaled", oracle_scaled,
                       "scale by C_{H,d}^{|m|/2} ||f||^{|m|} (full CLT target)");

    auto* c_mom = app.add_subcommand("clt-moments", "empirical F_n moments vs oracle targets");
    add_common(c_mom, common, true);
    auto* c_lln = app.add_subcommand("lln", "first-order functional vs E L_t(0) * integral(g)");
    add_common(c_lln, common, true);
    auto* c_tight = app.add_subcommand("tightness", "interval-length scaling of E[(F_n(b)-F_n(a))^2]");
    add_common(c_tight, common, true);
    auto* c_ks = app.add_subcommand("ks", "two-sample KS test: F_n draws vs limit draws");
    add_common(c_ks, common, true);

    try {
        app.parse(argc, argv);

        if (c_const->parsed()) return run_constants(hurst, dim, beta_opt, constants_json);
        if (c_sim->parsed()) return run_simulate(common, steps, dt, n_paths);
        if (c_oracle->parsed()) return run_oracle(common, oracle_scaled);

        const fbmclt::ExperimentConfig cfg = load_config(common);
        fbmclt::Report rep;
        if (c_mom->parsed())
            rep = fbmclt::run_clt_moments(cfg);
        else if (c_lln->parsed())
            rep = fbmclt::run_lln(cfg);
        else if (c_tight->parsed())
            rep = fbmclt::run_tightness_scan(cfg);
        else
            rep = fbmclt::run_distribution_test(cfg);
        return finish_run(rep, cfg, common.check);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // malformed invocation is a config error
    } catch (const fbmclt::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const fbmclt::numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
