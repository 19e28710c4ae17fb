#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lifecycle/policy.hpp"
#include "lifecycle/solver.hpp"

namespace lifecycle {

// Outcome of one verification check. For residual-style checks max_residual
// is the worst relative mismatch over the grid; for direction/convergence
// checks it counts violated clauses and the tolerance is zero.
struct CheckReport {
    std::string name;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    double worst_a = 0.0;  // (y,h) or (x,h) of the worst point
    double worst_b = 0.0;
    std::string detail;

    void finish() { pass = max_residual <= tolerance; }
};

inline nlohmann::json to_json(const CheckReport& r) {
    return nlohmann::json{{"name", r.name},
                          {"max_residual", r.max_residual},
                          {"tolerance", r.tolerance},
                          {"pass", r.pass},
                          {"worst_point", {r.worst_a, r.worst_b}},
                          {"detail", r.detail}};
}

namespace detail {

inline std::vector<double> geom_grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = lo * std::pow(hi / lo, n > 1 ? static_cast<double>(i) / (n - 1) : 0.0);
    return g;
}

}  // namespace detail

// Residual of the linear dual equation kappa^2/2 y^2 v_yy - (r+l) v + Vtilde
// on log grids covering all regions, for each h in h_grid.
inline CheckReport check_ode_residual(const Solver& s, std::vector<double> h_grid = {0.5, 1.0, 2.0},
                                      std::size_t n_per_region = 200) {
    const ModelParams& p = s.params();
    const double k2h = 0.5 * s.constants().kappa * s.constants().kappa;
    const double rl = p.r + p.lambda;
    CheckReport rep;
    rep.name = "ode_residual";
    rep.tolerance = 1e-8;
    for (double h : h_grid) {
        const HSlice hs = s.dual().slice(h);
        struct Span {
            double lo, hi;
            DualRegion reg;
        };
        std::vector<Span> spans{{hs.y3, hs.y2 * (1.0 - 1e-9), DualRegion::R3},
                                {hs.y2, std::isfinite(hs.y1) ? hs.y1 : hs.y2 * 1e3, DualRegion::R2}};
        if (std::isfinite(hs.y1))
            spans.push_back({hs.y1 * (1.0 + 1e-9), hs.y1 * 1e3, DualRegion::R1});
        for (const Span& span : spans) {
            for (double y : detail::geom_grid(span.lo, span.hi, n_per_region)) {
                const double vv = s.dual().v(y, hs, span.reg);
                const double res =
                    std::fabs(k2h * y * y * s.dual().v_yy(y, hs, span.reg) - rl * vv +
                              s.dual().v_tilde(y, h)) /
                    (1.0 + std::fabs(vv));
                if (res > rep.max_residual) {
                    rep.max_residual = res;
                    rep.worst_a = y;
                    rep.worst_b = h;
                }
            }
        }
    }
    rep.finish();
    return rep;
}

// C0/C1 pasting of v across the interior free boundaries y1(h) and y2(h),
// plus the reflecting-boundary condition v_h = 0 at y3(h).
inline CheckReport check_smooth_fit(const Solver& s,
                                    std::vector<double> h_grid = {0.05, 0.2, 0.5, 1.0, 2.0, 10.0,
                                                                  50.0}) {
    CheckReport rep;
    rep.name = "smooth_fit";
    rep.tolerance = 1e-10;
    auto consider = [&](double mism, double y, double h) {
        if (mism > rep.max_residual) {
            rep.max_residual = mism;
            rep.worst_a = y;
            rep.worst_b = h;
        }
    };
    for (double h : h_grid) {
        const HSlice hs = s.dual().slice(h);
        struct Seam {
            double y;
            DualRegion left, right;
        };
        std::vector<Seam> seams{{hs.y2, DualRegion::R3, DualRegion::R2}};
        if (std::isfinite(hs.y1)) seams.push_back({hs.y1, DualRegion::R2, DualRegion::R1});
        for (const Seam& seam : seams) {
            const double va = s.dual().v(seam.y, hs, seam.left);
            const double vb = s.dual().v(seam.y, hs, seam.right);
            const double da = s.dual().v_y(seam.y, hs, seam.left);
            const double db = s.dual().v_y(seam.y, hs, seam.right);
            consider(std::fabs(va - vb) / (1.0 + std::fabs(va)), seam.y, h);
            consider(std::fabs(da - db) / (1.0 + std::fabs(da)), seam.y, h);
        }
        const double vh3 = s.dual().v_h(hs.y3, hs, DualRegion::R3);
        consider(std::fabs(vh3) / (1.0 + std::fabs(s.dual().v(hs.y3, hs, DualRegion::R3))), hs.y3,
                 h);
    }
    rep.finish();
    return rep;
}

// Residual of the primal variational equation on an interior (x,h) grid,
// using the exact dual identities u_x = f and u_xx = -1/v_yy. The
// consumption supremum is evaluated exactly over the three candidates
// {nu h, interior first-order point, h}.
inline CheckReport check_hjb_residual(const Solver& s, std::size_t nx = 50, std::size_t nh = 20) {
    const ModelParams& p = s.params();
    const DerivedConstants& dc = s.constants();
    const double rl = p.r + p.lambda;
    CheckReport rep;
    rep.name = "hjb_residual";
    rep.tolerance = 1e-6;
    double worst_uh = -std::numeric_limits<double>::infinity();
    double worst_uh_lavs = 0.0;
    for (double h : detail::geom_grid(0.05, 50.0, nh)) {
        const HSlice hs = s.dual().slice(h);
        const BoundarySet bs = s.boundary_curves(hs);
        const double lo = bs.x_bound + 1e-4 * (bs.x_lavs - bs.x_bound);
        const double hi = bs.x_lavs - 1e-4 * (bs.x_lavs - bs.x_bound);
        for (std::size_t i = 0; i < nx; ++i) {
            const double x = lo + (hi - lo) * static_cast<double>(i) / (nx - 1);
            const PrimalRegion reg = s.region_of(x, bs);
            const double y = s.dual_point(x, hs, reg);
            const DualRegion dreg = Solver::dual_region_of(reg);
            const double u = s.dual().v(y, hs, dreg) + x * y;
            const double vyy = s.dual().v_yy(y, hs, dreg);
            // sup over the candidate consumption set
            double sup = utility_u(p, p.nu * h, h) - p.nu * h * y;
            sup = std::max(sup, utility_u(p, h, h) - h * y);
            double c_foc = std::pow(h, p.alpha * dc.beta1) * std::pow(y, dc.beta1 - 1.0);
            c_foc = std::clamp(c_foc, p.nu * h, h);
            sup = std::max(sup, utility_u(p, c_foc, h) - c_foc * y);
            const double res = sup - rl * u + rl * x * y + s.dual().bequest_dual(y) +
                               0.5 * dc.kappa * dc.kappa * y * y * vyy;
            const double rel = std::fabs(res) / (1.0 + std::fabs(u));
            if (rel > rep.max_residual) {
                rep.max_residual = rel;
                rep.worst_a = x;
                rep.worst_b = h;
            }
            worst_uh = std::max(worst_uh, s.dual().v_h(y, hs, dreg));
        }
        worst_uh_lavs = std::max(worst_uh_lavs, std::fabs(s.dual().v_h(hs.y3, hs, DualRegion::R3)));
    }
    std::ostringstream os;
    os << "max u_h over grid = " << worst_uh << " (limit 1e-9); max |u_h| on the ratchet boundary = "
       << worst_uh_lavs << " (limit 1e-8)";
    rep.detail = os.str();
    rep.pass = rep.max_residual <= rep.tolerance && worst_uh <= 1e-9 && worst_uh_lavs <= 1e-8;
    return rep;
}

// Convexity of the dual value function over a grid spanning all regions.
inline CheckReport check_convexity(const Solver& s, std::vector<double> h_grid = {0.5, 1.0, 2.0},
                                   std::size_t n_y = 600) {
    CheckReport rep;
    rep.name = "convexity";
    rep.tolerance = 0.0;
    double min_vyy = std::numeric_limits<double>::infinity();
    for (double h : h_grid) {
        const HSlice hs = s.dual().slice(h);
        const double yhi = std::isfinite(hs.y1) ? hs.y1 * 1e3 : hs.y2 * 1e3;
        for (double y : detail::geom_grid(hs.y3, yhi, n_y)) {
            DualRegion reg = s.dual().region(y, hs);
            if (reg == DualRegion::D2Boundary) reg = DualRegion::R3;
            const double vyy = s.dual().v_yy(y, hs, reg);
            if (vyy < min_vyy) {
                min_vyy = vyy;
                rep.worst_a = y;
                rep.worst_b = h;
            }
        }
    }
    rep.max_residual = min_vyy > 0.0 ? 0.0 : 1.0;
    std::ostringstream os;
    os << "min v_yy = " << min_vyy;
    rep.detail = os.str();
    rep.finish();
    return rep;
}

// Limits of c/x, pi/x and b/x along the ratchet boundary as h grows. The
// analytic limits come from the power-law representation; the finite-h
// sequence is computed through the full inversion pipeline. The convergence
// clause asks for a 10x contraction of successive differences across
// h = 1e2, 1e3, 1e4.
inline CheckReport check_asymptotics(const ModelParams& baseline) {
    CheckReport rep;
    rep.name = "asymptotics";
    rep.tolerance = 0.0;
    int violations = 0;
    std::ostringstream os;

    const Solver s{baseline};
    const DerivedConstants& dc = s.constants();
    const ModelParams& p = s.params();
    const CoefficientSet co = s.dual().coefficients();

    const double hgrid[3] = {1e2, 1e3, 1e4};
    double cx[3], pix[3], bx[3];
    for (int i = 0; i < 3; ++i) {
        const double h = hgrid[i];
        const double xl = s.boundary_curves(h).x_lavs;
        const PolicyDecision d = optimal_controls(s, xl, h);
        cx[i] = d.c / xl;
        pix[i] = d.pi / xl;
        bx[i] = d.b / xl;
    }

    // analytic limit of x_lavs(h)/h and of pi(h)/h along the boundary
    const double L = s.xlavs_linear_slope();
    const double oma = 1.0 - p.alpha;
    const double rr = 2.0 * (p.r + p.lambda) / (dc.kappa * dc.kappa);
    double pi_slope = (p.mu - p.r) / (p.sigma * p.sigma) *
                      (rr * co.c5.scale * std::pow(oma, dc.r1 - 1.0) +
                       rr * co.c6.scale * std::pow(oma, dc.r2 - 1.0));
    const double ebq = (dc.beta2 - 1.0) * s.dual().boundary_exponent();
    if (p.lambda > 0.0 && std::fabs(ebq - 1.0) < 1e-12)
        pi_slope += (p.mu - p.r) / (p.sigma * p.sigma) * dc.beta2 * (dc.beta2 - 1.0) *
                    s.dual().bequest_coef() * std::pow(oma, dc.beta2 - 1.0);
    const double cx_limit = 1.0 / L;
    const double pix_limit = pi_slope / L;
    if (!(cx_limit > 0.0)) ++violations;
    if (!(pix_limit > 0.0)) ++violations;

    // closed-form display of lim x_lavs(h)/h, coded independently of the
    // coefficient machinery
    const double r1 = dc.r1, r2 = dc.r2, b1 = dc.beta1, b2 = dc.beta2;
    const double g1 = p.gamma1, rl = p.r + p.lambda;
    const double nuP = p.nu > 0.0 ? std::pow(p.nu, r2 * g1 + r1) : 0.0;
    double display = -r1 * std::pow(oma, -r2) * (nuP - 1.0) * (1.0 - b1) / (rl * (r1 - r2) * (b1 - r1)) -
                     r2 * std::pow(oma, -r2) * (1.0 - nuP) * (1.0 - b1) * (r2 * oma * g1 + r1) /
                         (rl * (r1 - r2) * (b1 - r1) * (r1 * oma * g1 + r2)) +
                     1.0 / rl;
    if (std::fabs(p.gamma2 - oma * g1) < 1e-12)
        display += -2.0 * p.lambda * std::pow(oma, b2 - 1.0) * std::pow(p.K, 1.0 - b2) /
                   (dc.kappa * dc.kappa * (b2 - r1) * (b2 - r2));
    const double limit_mismatch = std::fabs(cx_limit - 1.0 / display) / (1.0 / display);
    if (limit_mismatch > 1e-6) ++violations;

    // a sequence constant to solver precision counts as already converged
    const bool c_flat = std::fabs(cx[1] - cx[0]) < 1e-9 * std::fabs(cx[0]) &&
                        std::fabs(cx[2] - cx[1]) < 1e-9 * std::fabs(cx[1]);
    const bool pi_flat = std::fabs(pix[1] - pix[0]) < 1e-9 * std::fabs(pix[0]) &&
                         std::fabs(pix[2] - pix[1]) < 1e-9 * std::fabs(pix[1]);

    // monotone approach toward the limits
    if (!c_flat && !((cx[0] < cx[1]) == (cx[1] < cx[2]) &&
                     std::fabs(cx[2] - cx_limit) <= std::fabs(cx[0] - cx_limit)))
        ++violations;
    if (!pi_flat && !((pix[0] < pix[1]) == (pix[1] < pix[2]) &&
                      std::fabs(pix[2] - pix_limit) <= std::fabs(pix[0] - pix_limit)))
        ++violations;

    // Cauchy-style contraction of successive differences by at least 10x
    const double eps = 1e-14;
    const double contr_c = std::fabs(cx[1] - cx[0]) / std::max(std::fabs(cx[2] - cx[1]), eps);
    const double contr_pi = std::fabs(pix[1] - pix[0]) / std::max(std::fabs(pix[2] - pix[1]), eps);
    if (!c_flat && contr_c < 10.0) ++violations;
    if (!pi_flat && contr_pi < 10.0) ++violations;

    // bequest ratio: vanishes unless gamma2 = (1-alpha) gamma1
    const bool equality_case = std::fabs(p.gamma2 - oma * g1) < 1e-12;
    if (equality_case) {
        if (!(bx[2] > 0.0 && std::fabs(bx[2] - bx[0]) < 1e-6 * bx[0] * 10.0)) ++violations;
    } else {
        if (!(bx[0] > bx[1] && bx[1] > bx[2])) ++violations;
    }

    os << "c/x at h=1e2,1e3,1e4: " << cx[0] << ", " << cx[1] << ", " << cx[2]
       << " (analytic limit " << cx_limit << ", display mismatch " << limit_mismatch << ")"
       << "; pi/x: " << pix[0] << ", " << pix[1] << ", " << pix[2] << " (limit " << pix_limit << ")"
       << "; b/x: " << bx[0] << ", " << bx[1] << ", " << bx[2]
       << "; difference contraction c/x " << contr_c << "x, pi/x " << contr_pi
       << "x (required 10x)";
    rep.detail = os.str();
    rep.max_residual = violations;
    rep.worst_a = contr_c;
    rep.worst_b = contr_pi;
    rep.finish();
    return rep;
}

// Direction of the wealth thresholds at h = 1 under one-parameter changes:
// decreasing in lambda and alpha, increasing in nu. Ties within 1e-10
// relative count as indeterminate rather than failures.
inline CheckReport check_sensitivities(const ModelParams& baseline) {
    CheckReport rep;
    rep.name = "sensitivities";
    rep.tolerance = 0.0;
    int violations = 0;
    int indeterminate = 0;
    std::ostringstream os;

    auto thresholds = [&](const ModelParams& p) {
        const Solver s{p};
        const BoundarySet bs = s.boundary_curves(1.0);
        return std::array<double, 3>{bs.x_low, bs.x_aggr, bs.x_lavs};
    };
    auto scan = [&](const char* axis, const std::vector<double>& values, int direction,
                    auto setter) {
        std::array<double, 3> prev{};
        bool first = true;
        for (double v : values) {
            ModelParams p = baseline;
            setter(p, v);
            const auto a1 = check_assumption_a1(p, derive_constants(p));
            if (!a1.ok) {
                // the closed form is only available under the parameter
                // restriction; skip such grid points with a diagnostic
                os << axis << "=" << v << " skipped (restriction fails); ";
                continue;
            }
            const auto cur = thresholds(p);
            if (!first) {
                static const char* names[3] = {"x_low", "x_aggr", "x_lavs"};
                for (int i = 0; i < 3; ++i) {
                    const double d = (cur[i] - prev[i]) * direction;
                    if (std::fabs(cur[i] - prev[i]) <= 1e-10 * std::fabs(prev[i])) {
                        ++indeterminate;
                        os << axis << ":" << names[i] << " indeterminate; ";
                    } else if (d <= 0.0) {
                        ++violations;
                        os << axis << ":" << names[i] << " moved the wrong way (" << prev[i]
                           << " -> " << cur[i] << "); ";
                    }
                }
            }
            prev = cur;
            first = false;
        }
    };
    scan("lambda", {0.01, 0.03, 0.05}, -1, [](ModelParams& p, double v) { p.lambda = v; });
    scan("alpha", {0.5, 0.7, 0.9}, -1, [](ModelParams& p, double v) { p.alpha = v; });
    scan("nu", {0.1, 0.2, 0.3}, +1, [](ModelParams& p, double v) { p.nu = v; });
    if (violations == 0 && indeterminate == 0) os << "all directions as expected";
    rep.detail = os.str();
    rep.max_residual = violations;
    rep.finish();
    return rep;
}

// Full verifier battery at the default grids, merged by name.
inline std::vector<CheckReport> run_all_checks(const ModelParams& params) {
    const Solver s{params};
    std::vector<CheckReport> reports;
    reports.push_back(check_ode_residual(s));
    reports.push_back(check_smooth_fit(s));
    reports.push_back(check_convexity(s));
    reports.push_back(check_hjb_residual(s));
    reports.push_back(check_asymptotics(params));
    reports.push_back(check_sensitivities(params));
    std::sort(reports.begin(), reports.end(),
              [](const CheckReport& a, const CheckReport& b) { return a.name < b.name; });
    return reports;
}

inline nlohmann::json report_to_json(const std::vector<CheckReport>& reports) {
    nlohmann::json arr = nlohmann::json::array();
    bool all = true;
    for (const CheckReport& r : reports) {
        arr.push_back(to_json(r));
        all = all && r.pass;
    }
    return nlohmann::json{{"checks", arr}, {"all_pass", all}};
}

}  // namespace lifecycle
