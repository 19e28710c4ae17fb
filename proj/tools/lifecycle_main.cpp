// Command-line front end: evaluate the feedback policy, dump boundary curves
// and sensitivity sweeps as CSV, run Monte Carlo simulations and run the
// verifier battery.
//
// Exit codes: 0 ok, 2 invalid configuration, 3 inadmissible state,
// 4 numerical failure.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lifecycle/csv.hpp"
#include "lifecycle/model_io.hpp"
#include "lifecycle/policy.hpp"
#include "lifecycle/simulate.hpp"
#include "lifecycle/solver.hpp"
#include "lifecycle/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInadmissible = 3;
constexpr int kExitNumeric = 4;

struct CommonOpts {
    std::string params_file;
    std::vector<std::string> overrides;
};

lifecycle::ModelParams load_params(const CommonOpts& opts) {
    lifecycle::ModelParams p;  // baseline calibration when no file is given
    if (!opts.params_file.empty()) p = lifecycle::params_from_file(opts.params_file);
    for (const std::string& kv : opts.overrides) lifecycle::apply_override(p, kv);
    p.validate();
    const auto dc = lifecycle::derive_constants(p);
    const auto a1 = lifecycle::check_assumption_a1(p, dc);
    if (!a1.ok) throw lifecycle::validation_error("parameter restriction failed: " + a1.detail);
    return p;
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw lifecycle::validation_error("cannot open output file: " + path);
    return file;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = lo * std::pow(hi / lo, n > 1 ? static_cast<double>(i) / (n - 1) : 0.0);
    return g;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Closed-form lifecycle consumption, investment and life-insurance policies "
                 "under a spending-peak reference with a consumption drawdown floor"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print help");

    CommonOpts common;
    app.add_option("--params", common.params_file, "JSON parameter file");
    app.add_option("--set", common.overrides, "parameter override key=value (repeatable)");

    // policy
    double px = 0.0, ph = 1.0;
    CLI::App* cmd_policy = app.add_subcommand("policy", "evaluate the feedback controls at (x,h)");
    cmd_policy->set_help_flag("--help", "print help");
    cmd_policy->fallthrough();
    cmd_policy->add_option("--x", px, "wealth")->required();
    cmd_policy->add_option("--h", ph, "reference level")->required();

    // boundaries
    double hmin = 0.05, hmax = 50.0;
    std::size_t hn = 100;
    std::string out_path;
    CLI::App* cmd_bounds = app.add_subcommand("boundaries", "dump threshold curves on a log grid of h");
    cmd_bounds->set_help_flag("--help", "print help");
    cmd_bounds->fallthrough();
    cmd_bounds->add_option("--hmin", hmin, "lowest h");
    cmd_bounds->add_option("--hmax", hmax, "highest h");
    cmd_bounds->add_option("--n", hn, "grid size");
    cmd_bounds->add_option("--out", out_path, "output CSV (stdout when omitted)");

    // sweep
    std::string axis;
    std::vector<double> axis_values;
    double sx_min = 3.0, sx_max = 20.0, sweep_h = 1.0;
    std::size_t sx_n = 50;
    CLI::App* cmd_sweep = app.add_subcommand("sweep", "policy sweep over x for several parameter values");
    cmd_sweep->set_help_flag("--help", "print help");
    cmd_sweep->fallthrough();
    cmd_sweep->add_option("--axis", axis, "one of lambda, alpha, K, nu")->required();
    cmd_sweep->add_option("--values", axis_values, "comma-separated axis values")
        ->required()
        ->delimiter(',');
    cmd_sweep->add_option("--xmin", sx_min, "lowest wealth");
    cmd_sweep->add_option("--xmax", sx_max, "highest wealth");
    cmd_sweep->add_option("--xn", sx_n, "wealth grid size");
    cmd_sweep->add_option("--h", sweep_h, "reference level");
    cmd_sweep->add_option("--out", out_path, "output CSV (stdout when omitted)");

    // simulate
    double x0 = 3.5, h0 = 1.0;
    lifecycle::SimConfig cfg;
    std::string variant_name = "full";
    CLI::App* cmd_sim = app.add_subcommand("simulate", "Monte Carlo simulation of the controlled system");
    cmd_sim->set_help_flag("--help", "print help");
    cmd_sim->fallthrough();
    cmd_sim->add_option("--x0", x0, "initial wealth");
    cmd_sim->add_option("--h0", h0, "initial reference level");
    cmd_sim->add_option("--dt", cfg.dt, "Euler step in years");
    cmd_sim->add_option("--horizon", cfg.horizon, "horizon in years");
    cmd_sim->add_option("--paths", cfg.n_paths, "number of paths");
    cmd_sim->add_option("--seed", cfg.seed, "RNG seed");
    cmd_sim->add_option("--variant", variant_name, "full | no-insurance-no-drawdown | non-habit");
    cmd_sim->add_option("--record-stride", cfg.record_stride, "steps per output row");
    cmd_sim->add_flag("--sample-death", cfg.sample_death, "truncate paths at an exponential death time");
    cmd_sim->add_option("--out", out_path, "output CSV (stdout when omitted)");

    // verify
    std::string report_path;
    CLI::App* cmd_verify = app.add_subcommand("verify", "run the closed-form verification battery");
    cmd_verify->set_help_flag("--help", "print help");
    cmd_verify->fallthrough();
    cmd_verify->add_option("--out", report_path, "JSON report file (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        const lifecycle::ModelParams params = load_params(common);

        if (*cmd_policy) {
            const lifecycle::Solver solver{params};
            lifecycle::JumpResult jump;
            try {
                jump = lifecycle::apply_initial_jump(solver, px, ph);
            } catch (const lifecycle::admissibility_error& e) {
                std::cerr << "inadmissible state: " << e.what() << "\n";
                return kExitInadmissible;
            }
            const lifecycle::PolicyDecision d = lifecycle::optimal_controls(solver, px, jump.h_new);
            const double u = solver.value_u(px, jump.h_new);
            std::cout << "region=" << lifecycle::to_string(d.region) << " h=" << lifecycle::csv_num(jump.h_new)
                      << " jumped=" << (jump.jumped ? "yes" : "no") << " c=" << lifecycle::csv_num(d.c)
                      << " pi=" << lifecycle::csv_num(d.pi) << " b=" << lifecycle::csv_num(d.b)
                      << " p=" << lifecycle::csv_num(d.p) << " u=" << lifecycle::csv_num(u) << "\n";
            return kExitOk;
        }

        if (*cmd_bounds) {
            if (!(hmin > 0.0 && hmax >= hmin && hn >= 1))
                throw lifecycle::validation_error("boundaries requires 0 < hmin <= hmax and n >= 1");
            const lifecycle::Solver solver{params};
            std::ofstream file;
            std::ostream& os = open_out(file, out_path);
            os << "h,x_bound,x_low,x_aggr,x_lavs\n";
            for (double h : log_grid(hmin, hmax, hn)) {
                const lifecycle::BoundarySet bs = solver.boundary_curves(h);
                lifecycle::csv_row(os, h, bs.x_bound, bs.x_low, bs.x_aggr, bs.x_lavs);
            }
            return kExitOk;
        }

        if (*cmd_sweep) {
            if (axis != "lambda" && axis != "alpha" && axis != "K" && axis != "nu")
                throw lifecycle::validation_error("sweep axis must be lambda, alpha, K or nu");
            if (axis_values.empty()) throw lifecycle::validation_error("sweep needs at least one value");
            if (!(sx_min > 0.0 && sx_max >= sx_min && sx_n >= 1))
                throw lifecycle::validation_error("sweep requires 0 < xmin <= xmax and xn >= 1");
            std::ofstream file;
            std::ostream& os = open_out(file, out_path);
            os << "axis_value,x,c,pi,p\n";
            for (double v : axis_values) {
                lifecycle::ModelParams p = params;
                if (axis == "lambda") p.lambda = v;
                else if (axis == "alpha") p.alpha = v;
                else if (axis == "K") p.K = v;
                else p.nu = v;
                p.validate();
                const lifecycle::Solver solver{p};
                for (std::size_t i = 0; i < sx_n; ++i) {
                    const double x =
                        sx_n > 1 ? sx_min + (sx_max - sx_min) * static_cast<double>(i) / (sx_n - 1)
                                 : sx_min;
                    const lifecycle::JumpResult jump = lifecycle::apply_initial_jump(solver, x, sweep_h);
                    const lifecycle::PolicyDecision d = lifecycle::optimal_controls(solver, x, jump.h_new);
                    lifecycle::csv_row(os, v, x, d.c, d.pi, d.p);
                }
            }
            return kExitOk;
        }

        if (*cmd_sim) {
            cfg.variant = lifecycle::variant_from_string(variant_name);
            cfg.validate();
            std::ofstream file;
            std::ostream& os = open_out(file, out_path);
            if (cfg.n_paths == 1) {
                const auto records = lifecycle::simulate_path(params, x0, h0, cfg);
                os << "t,X,H,c,pi,b,p\n";
                for (const auto& r : records) lifecycle::csv_row(os, r.t, r.X, r.H, r.c, r.pi, r.b, r.p);
            } else {
                const auto summary = lifecycle::simulate_ensemble(params, x0, h0, cfg);
                os << "t,mean_X,q05_X,q95_X,mean_c,mean_pi,mean_p\n";
                for (std::size_t i = 0; i < summary.t.size(); ++i)
                    lifecycle::csv_row(os, summary.t[i], summary.mean_X[i], summary.q05_X[i],
                                       summary.q95_X[i], summary.mean_c[i], summary.mean_pi[i],
                                       summary.mean_p[i]);
            }
            return kExitOk;
        }

        if (*cmd_verify) {
            const auto reports = lifecycle::run_all_checks(params);
            const nlohmann::json j = lifecycle::report_to_json(reports);
            if (report_path.empty()) {
                std::cout << j.dump(2) << "\n";
            } else {
                std::ofstream file(report_path);
                if (!file) throw lifecycle::validation_error("cannot open output file: " + report_path);
                file << j.dump(2) << "\n";
            }
            return j.at("all_pass").get<bool>() ? kExitOk : 1;
        }
    } catch (const lifecycle::validation_error& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return kExitConfig;
    } catch (const lifecycle::admissibility_error& e) {
        std::cerr << "inadmissible state: " << e.what() << "\n";
        return kExitInadmissible;
    } catch (const lifecycle::numeric_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
