#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "lifecycle/policy.hpp"
#include "lifecycle/rng.hpp"
#include "lifecycle/solver.hpp"

namespace lifecycle {

// Model variants used in the comparison studies. Overrides are applied to
// the parameters before the solver is built.
enum class Variant { Full, NoInsuranceNoDrawdown, NonHabit };

inline const char* to_string(Variant v) {
    switch (v) {
        case Variant::Full: return "full";
        case Variant::NoInsuranceNoDrawdown: return "no-insurance-no-drawdown";
        default: return "non-habit";
    }
}

inline Variant variant_from_string(const std::string& name) {
    if (name == "full") return Variant::Full;
    if (name == "no-insurance-no-drawdown" || name == "guasoni")
        return Variant::NoInsuranceNoDrawdown;
    if (name == "non-habit") return Variant::NonHabit;
    throw validation_error("unknown variant: " + name);
}

inline ModelParams apply_variant(ModelParams p, Variant v) {
    switch (v) {
        case Variant::NoInsuranceNoDrawdown:
            p.lambda = 0.0;
            p.nu = 0.0;
            break;
        case Variant::NonHabit:
            p.alpha = 0.0;
            break;
        default: break;
    }
    return p;
}

struct SimConfig {
    double dt = 1e-3;          // Euler step (years)
    double horizon = 10.0;     // T (years)
    std::size_t n_paths = 1;
    std::uint64_t seed = 1;
    Variant variant = Variant::Full;
    std::size_t record_stride = 1;  // steps per output row
    bool sample_death = false;      // truncate at tau ~ Exponential(lambda)

    void validate() const {
        if (!(dt > 0.0)) throw validation_error("dt must be positive");
        if (!(horizon > 0.0)) throw validation_error("horizon must be positive");
        if (n_paths < 1) throw validation_error("n_paths must be at least 1");
        if (record_stride < 1) throw validation_error("record_stride must be at least 1");
    }
};

struct PathRecord {
    double t;
    double X;   // wealth
    double H;   // running consumption maximum
    double c;
    double pi;
    double b;
    double p;
};

namespace detail {

inline unsigned worker_count(std::size_t jobs) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    return static_cast<unsigned>(std::min<std::size_t>(hw, jobs));
}

// Runs fn(first, last) over a partition of [0, n) on all cores. Results must
// be written to per-index slots so the partition does not affect outcomes.
// The first exception thrown by a worker is rethrown in the caller.
inline void parallel_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    const unsigned workers = worker_count(n);
    if (workers <= 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t first = w * chunk;
        const std::size_t last = std::min(n, first + chunk);
        if (first >= last) break;
        pool.emplace_back([&, w, first, last] {
            try {
                fn(first, last);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);
}

}  // namespace detail

// One Euler path of the optimally controlled wealth/reference system.
// After every step the reference is projected to h_tilde(X) whenever X has
// crossed the ratchet boundary, and the state freezes once the wealth floor
// is hit. Records are emitted every `record_stride` steps plus the final
// time.
template <typename RecordSink>
inline void simulate_path_into(const Solver& s, double x0, double h0, const SimConfig& cfg,
                               std::uint64_t path_index, RecordSink&& sink) {
    cfg.validate();
    const ModelParams& p = s.params();
    Rng rng(cfg.seed, path_index);
    double horizon = cfg.horizon;
    if (cfg.sample_death && p.lambda > 0.0)
        horizon = std::min(horizon, rng.next_exponential(p.lambda));

    const JumpResult jump = h0 == 0.0 || x0 > s.boundary_curves(h0).x_lavs * (1.0 + 1e-12)
                                ? apply_initial_jump(s, x0, h0)
                                : JumpResult{h0, false};
    double X = x0, H = jump.h_new;
    HSlice hs = s.dual().slice(H);
    BoundarySet bs = s.boundary_curves(hs);
    if (X < bs.x_bound * (1.0 - 1e-12))
        throw admissibility_error("initial wealth below the floor nu*h/(r+lambda)");

    const double rl = p.r + p.lambda;
    // integer step grid: times are k * dt with a final (possibly shorter)
    // step landing exactly on the horizon, so record counts are exact
    const std::size_t n_steps =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(horizon / cfg.dt - 1e-9)));
    bool frozen = false;
    for (std::size_t step = 0; step <= n_steps; ++step) {
        const double t = std::min(step * cfg.dt, horizon);
        if (!frozen && X - bs.x_bound <= 1e-9 * (1.0 + H)) {
            frozen = true;
            X = bs.x_bound;
        }
        PolicyDecision d;
        if (frozen) {
            d.c = p.nu * H;
            d.pi = 0.0;
            d.b = 0.0;
            d.p = -p.lambda * X;
            d.region = PrimalRegion::Floor;
            d.y = std::numeric_limits<double>::infinity();
        } else {
            d = optimal_controls(s, X, hs, bs);
        }
        if (step % cfg.record_stride == 0 || step == n_steps)
            sink(PathRecord{t, X, H, d.c, d.pi, d.b, d.p});
        if (step == n_steps) break;

        const double dt = std::min(cfg.dt, horizon - t);
        const double dW = std::sqrt(dt) * rng.next_normal();
        if (!frozen) {
            X += (rl * X + d.pi * (p.mu - p.r) - d.c - p.lambda * d.b) * dt + d.pi * p.sigma * dW;
            if (!std::isfinite(X) || X < 0.0)
                throw numeric_error("simulate_path: invalid wealth " + std::to_string(X) +
                                    " at t=" + std::to_string(t + dt) + " (step " +
                                    std::to_string(step) + ", H=" + std::to_string(H) + ")");
            if (X > bs.x_lavs) {
                H = s.h_tilde(X);
                hs = s.dual().slice(H);
                bs = s.boundary_curves(hs);
            }
        }
    }
}

inline std::vector<PathRecord> simulate_path(const Solver& s, double x0, double h0,
                                             const SimConfig& cfg, std::uint64_t path_index = 0) {
    std::vector<PathRecord> out;
    out.reserve(static_cast<std::size_t>(cfg.horizon / cfg.dt) / cfg.record_stride + 2);
    simulate_path_into(s, x0, h0, cfg, path_index, [&](const PathRecord& r) { out.push_back(r); });
    return out;
}

// Variant-adjusting convenience entry point.
inline std::vector<PathRecord> simulate_path(const ModelParams& params, double x0, double h0,
                                             const SimConfig& cfg) {
    const Solver s(apply_variant(params, cfg.variant));
    return simulate_path(s, x0, h0, cfg, 0);
}

// Time-bucketed ensemble statistics. Quantiles use the nearest-rank order
// statistic over paths alive at each time.
struct EnsembleSummary {
    std::vector<double> t;
    std::vector<double> mean_X, q05_X, q95_X;
    std::vector<double> mean_c, mean_pi, mean_p;
    std::vector<std::size_t> alive;
    std::size_t n_paths = 0;
};

inline EnsembleSummary simulate_ensemble(const ModelParams& params, double x0, double h0,
                                         const SimConfig& cfg) {
    cfg.validate();
    const Solver solver(apply_variant(params, cfg.variant));
    const std::size_t n_steps =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(cfg.horizon / cfg.dt - 1e-9)));
    const std::size_t n_rec = n_steps / cfg.record_stride + 1;
    const double rec_dt = cfg.record_stride * cfg.dt;
    const std::size_t n = cfg.n_paths;

    struct Cell {
        double X, c, pi, p;
        bool alive;
    };
    std::vector<Cell> table(n_rec * n, Cell{0, 0, 0, 0, false});

    detail::parallel_blocks(n, [&](std::size_t first, std::size_t last) {
        for (std::size_t i = first; i < last; ++i) {
            simulate_path_into(solver, x0, h0, cfg, i, [&](const PathRecord& r) {
                // bucket grid-aligned records only; a final record at an
                // off-grid death or horizon time is not a shared time point
                const auto row = static_cast<std::size_t>(std::llround(r.t / rec_dt));
                if (row < n_rec && std::fabs(r.t - row * rec_dt) <= 0.25 * cfg.dt)
                    table[row * n + i] = Cell{r.X, r.c, r.pi, r.p, true};
            });
        }
    });

    EnsembleSummary out;
    out.n_paths = n;
    std::vector<double> xs;
    xs.reserve(n);
    for (std::size_t rowi = 0; rowi < n_rec; ++rowi) {
        double sx = 0, sc = 0, spi = 0, sp = 0;
        xs.clear();
        for (std::size_t i = 0; i < n; ++i) {
            const Cell& cell = table[rowi * n + i];
            if (!cell.alive) continue;
            sx += cell.X;
            sc += cell.c;
            spi += cell.pi;
            sp += cell.p;
            xs.push_back(cell.X);
        }
        if (xs.empty()) break;
        std::sort(xs.begin(), xs.end());
        const std::size_t m = xs.size();
        auto rank = [&](double q) {
            const std::size_t idx = static_cast<std::size_t>(std::ceil(q * m));
            return xs[idx == 0 ? 0 : idx - 1];
        };
        out.t.push_back(std::min(cfg.horizon, rowi * rec_dt));
        out.mean_X.push_back(sx / m);
        out.q05_X.push_back(rank(0.05));
        out.q95_X.push_back(rank(0.95));
        out.mean_c.push_back(sc / m);
        out.mean_pi.push_back(spi / m);
        out.mean_p.push_back(sp / m);
        out.alive.push_back(m);
    }
    return out;
}

// Monte Carlo estimate of the discounted lifetime financing cost
// E[ int (c + lambda b) M dt ] under the dual feedback controls, driven by
// the exponential martingale Y and the running-infimum ratchet rule.
struct BudgetEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    double consumption_leg = 0.0;
    double bequest_leg = 0.0;
    std::size_t n_paths = 0;
};

inline BudgetEstimate budget_identity_mc(const ModelParams& params, double x0, double h0,
                                         const SimConfig& cfg) {
    cfg.validate();
    const ModelParams p = apply_variant(params, cfg.variant);
    const Solver solver(p);
    const DerivedConstants& dc = solver.constants();
    const double rl = p.r + p.lambda;
    if (!(std::exp(-rl * cfg.horizon) < 1e-3))
        throw validation_error("budget_identity_mc requires exp(-(r+lambda)T) < 1e-3");

    const JumpResult jump = apply_initial_jump(solver, x0, h0);
    const double h_start = jump.h_new;
    const HSlice hs0 = solver.dual().slice(h_start);
    const BoundarySet bs0 = solver.boundary_curves(hs0);
    const PrimalRegion reg0 = solver.region_of(x0, bs0);

    const std::size_t n_steps = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.dt));
    const std::size_t n = cfg.n_paths;
    const double dt = cfg.dt;

    // e^{-(r+lambda) t_k} table shared across paths
    std::vector<double> disc(n_steps);
    for (std::size_t k = 0; k < n_steps; ++k) disc[k] = std::exp(-rl * (k * dt));

    std::vector<double> total(n), cons(n), beq(n);

    if (reg0 == PrimalRegion::Floor) {
        // Deterministic consumption stream nu h at the floor; the state-price
        // weight is still random.
        const double nu_h = p.nu * h_start;
        detail::parallel_blocks(n, [&](std::size_t first, std::size_t last) {
            for (std::size_t i = first; i < last; ++i) {
                Rng rng(cfg.seed, i);
                const double kap = dc.kappa;
                const double drift = -0.5 * kap * kap * dt, sdt = kap * std::sqrt(dt);
                double logW = 0.0, acc = 0.0;
                for (std::size_t k = 0; k < n_steps; ++k) {
                    acc += nu_h * disc[k] * std::exp(logW) * dt;
                    logW += drift + sdt * rng.next_normal();
                }
                total[i] = cons[i] = acc;
                beq[i] = 0.0;
            }
        });
    } else {
        const double y0 = solver.dual_point(x0, hs0, reg0);
        const double e = solver.dual().boundary_exponent();
        const double inv_e = 1.0 / e;
        const double ab1 = p.alpha * dc.beta1;
        const double b1m1 = dc.beta1 - 1.0;
        const double b2m1 = dc.beta2 - 1.0;
        const double lK = std::log(p.K);
        const double ly0 = std::log(y0);
        const double l1ma = std::log(1.0 - p.alpha);
        const double lnu_off = p.nu > 0.0 ? (p.gamma1 - 1.0) * std::log(p.nu)
                                          : std::numeric_limits<double>::infinity();
        detail::parallel_blocks(n, [&](std::size_t first, std::size_t last) {
            for (std::size_t i = first; i < last; ++i) {
                Rng rng(cfg.seed, i);
                const double kap = dc.kappa;
                const double drift = -0.5 * kap * kap * dt, sdt = kap * std::sqrt(dt);
                double logY = ly0, logInf = ly0;
                double H = h_start, lH = std::log(H);
                double ly2 = e * lH, ly1 = ly2 + lnu_off, nuH = p.nu * H;
                double acc_c = 0.0, acc_b = 0.0;
                for (std::size_t k = 0; k < n_steps; ++k) {
                    double c;
                    if (logY > ly1)
                        c = nuH;
                    else if (logY >= ly2)
                        c = std::exp(ab1 * lH + b1m1 * logY);
                    else
                        c = H;
                    const double w = disc[k] * std::exp(logY - ly0) * dt;
                    acc_c += c * w;
                    if (p.lambda > 0.0) acc_b += p.lambda * std::exp(b2m1 * (logY - lK)) * w;
                    logY += drift + sdt * rng.next_normal();
                    if (logY < logInf) {
                        logInf = logY;
                        const double Hnew = std::exp(inv_e * (logInf - l1ma));
                        if (Hnew > H) {
                            H = Hnew;
                            lH = inv_e * (logInf - l1ma);
                            ly2 = e * lH;
                            ly1 = ly2 + lnu_off;
                            nuH = p.nu * H;
                        }
                    }
                }
                cons[i] = acc_c;
                beq[i] = acc_b;
                total[i] = acc_c + acc_b;
            }
        });
    }

    BudgetEstimate out;
    out.n_paths = n;
    double sum = 0.0, sc = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += total[i];
        sc += cons[i];
        sb += beq[i];
    }
    out.estimate = sum / n;
    out.consumption_leg = sc / n;
    out.bequest_leg = sb / n;
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = total[i] - out.estimate;
        var += d * d;
    }
    out.std_error = n > 1 ? std::sqrt(var / (n - 1) / n) : 0.0;
    return out;
}

// Terminal wealth of one path driven by externally supplied Brownian
// increments; used by the step-size refinement studies so that coarse and
// fine resolutions share the same underlying noise.
inline double simulate_terminal_wealth(const Solver& s, double x0, double h0, double dt,
                                       std::size_t n_steps, const double* dW) {
    const ModelParams& p = s.params();
    const JumpResult jump = apply_initial_jump(s, x0, h0);
    double X = x0, H = jump.h_new;
    HSlice hs = s.dual().slice(H);
    BoundarySet bs = s.boundary_curves(hs);
    const double rl = p.r + p.lambda;
    bool frozen = false;
    for (std::size_t k = 0; k < n_steps; ++k) {
        if (!frozen && X - bs.x_bound <= 1e-9 * (1.0 + H)) {
            frozen = true;
            X = bs.x_bound;
        }
        if (frozen) continue;
        const PolicyDecision d = optimal_controls(s, X, hs, bs);
        X += (rl * X + d.pi * (p.mu - p.r) - d.c - p.lambda * d.b) * dt + d.pi * p.sigma * dW[k];
        if (!std::isfinite(X) || X < 0.0)
            throw numeric_error("simulate_terminal_wealth: invalid wealth at step " +
                                std::to_string(k));
        if (X > bs.x_lavs) {
            H = s.h_tilde(X);
            hs = s.dual().slice(H);
            bs = s.boundary_curves(hs);
        }
    }
    return X;
}

}  // namespace lifecycle
