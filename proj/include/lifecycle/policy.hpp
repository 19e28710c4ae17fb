#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "lifecycle/solver.hpp"

namespace lifecycle {

// Feedback optimal controls at an admissible state.
struct PolicyDecision {
    double c = 0.0;   // consumption rate, in [nu h, h]
    double pi = 0.0;  // dollar position in the risky asset, >= 0
    double b = 0.0;   // bequest level, >= 0
    double p = 0.0;   // insurance premium rate, lambda (b - x); may be negative
    PrimalRegion region = PrimalRegion::Floor;
    double y = 0.0;   // dual point used (infinity at the floor)
};

struct JumpResult {
    double h_new = 0.0;
    bool jumped = false;
};

// States above the ratchet boundary (or with h = 0) move the reference up to
// h_tilde(x) at time zero; everything else is left untouched.
inline JumpResult apply_initial_jump(const Solver& s, double x, double h) {
    if (h == 0.0) {
        if (!(x > 0.0)) throw admissibility_error("initial jump from h = 0 requires x > 0");
        return {s.h_tilde(x), true};
    }
    const BoundarySet bs = s.boundary_curves(h);
    if (x < bs.x_bound * (1.0 - 1e-12))
        throw admissibility_error("wealth below the floor nu*h/(r+lambda)");
    if (x > bs.x_lavs * (1.0 + 1e-12)) return {s.h_tilde(x), true};
    return {h, false};
}

// Optimal portfolio in the display form used alongside the dual identity
// pi = (mu-r)/sigma^2 * y * v_yy(y,h); the two agree analytically and are
// cross-checked in the tests.
inline double portfolio_display_form(const Solver& s, double y, double h, DualRegion reg) {
    const ModelParams& p = s.params();
    const DerivedConstants& dc = s.constants();
    const CoefficientSet co = s.dual().coefficients();
    const double k2 = dc.kappa * dc.kappa;
    const double lead = (p.mu - p.r) / (p.sigma * p.sigma);
    const double rr = 2.0 * (p.r + p.lambda) / k2;
    const double bq = p.lambda > 0.0
                          ? 2.0 * p.lambda * std::pow(p.K, 1.0 - dc.beta2) * (dc.beta2 - 1.0) /
                                (k2 * (dc.beta2 - dc.r1) * (dc.beta2 - dc.r2)) *
                                std::pow(y, dc.beta2 - 1.0)
                          : 0.0;
    switch (reg) {
        case DualRegion::R1:
            return lead * (rr * co.c2(h) * std::pow(y, dc.r2 - 1.0) + bq);
        case DualRegion::R2:
            return lead * (rr * co.c3(h) * std::pow(y, dc.r1 - 1.0) +
                           rr * co.c4(h) * std::pow(y, dc.r2 - 1.0) + bq +
                           2.0 * (dc.beta1 - 1.0) * std::pow(h, p.alpha * dc.beta1) /
                               (k2 * (dc.beta1 - dc.r1) * (dc.beta1 - dc.r2)) *
                               std::pow(y, dc.beta1 - 1.0));
        default:
            return lead * (rr * co.c5(h) * std::pow(y, dc.r1 - 1.0) +
                           rr * co.c6(h) * std::pow(y, dc.r2 - 1.0) + bq);
    }
}

// Feedback controls at a jump-normalized state with precomputed slice and
// boundary curves (the hot path for the simulator).
inline PolicyDecision optimal_controls(const Solver& s, double x, const HSlice& hs,
                                       const BoundarySet& bs) {
    const ModelParams& p = s.params();
    const DerivedConstants& dc = s.constants();
    const double h = hs.h;
    const PrimalRegion reg = s.region_of(x, bs);
    if (reg == PrimalRegion::Jump)
        throw admissibility_error("state above x_lavs(h); apply the initial jump first");

    PolicyDecision d;
    d.region = reg;
    if (reg == PrimalRegion::Floor) {
        // At the floor the dual point diverges; the controls are the
        // continuity limits c = nu h, pi = 0, b = 0.
        d.c = p.nu * h;
        d.pi = 0.0;
        d.b = 0.0;
        d.p = p.lambda * (0.0 - x);
        d.y = std::numeric_limits<double>::infinity();
        return d;
    }

    const double y = s.dual_point(x, hs, reg);
    const DualRegion dreg = Solver::dual_region_of(reg);
    switch (reg) {
        case PrimalRegion::Constrained: d.c = p.nu * h; break;
        case PrimalRegion::Interior:
            d.c = std::pow(h, p.alpha * dc.beta1) * std::pow(y, dc.beta1 - 1.0);
            break;
        case PrimalRegion::Peak: d.c = h; break;
        default:  // Ratchet: the singular-control boundary value
            d.c = std::pow(y / (1.0 - p.alpha), 1.0 / s.dual().boundary_exponent());
            break;
    }
    d.y = y;
    d.pi = (p.mu - p.r) / (p.sigma * p.sigma) * y * s.dual().v_yy(y, hs, dreg);
    d.b = std::pow(y / p.K, dc.beta2 - 1.0);
    d.p = p.lambda * (d.b - x);
    return d;
}

inline PolicyDecision optimal_controls(const Solver& s, double x, double h) {
    const HSlice hs = s.dual().slice(h);
    return optimal_controls(s, x, hs, s.boundary_curves(hs));
}

struct PremiumThreshold {
    std::optional<double> x_star;
    std::string diagnostic;
};

// Wealth level at which the optimal premium changes sign, when it exists.
// When kappa^2 beta2 (beta2 - 1) >= 2r the premium stays negative for every
// admissible wealth; otherwise the zero of b(y) - x(y) is bracketed in the
// peak-consumption region and refined by bisection so that p(x*, h) = 0.
inline PremiumThreshold premium_sign_threshold(const Solver& s, double h) {
    const ModelParams& p = s.params();
    const DerivedConstants& dc = s.constants();
    PremiumThreshold out;
    if (p.lambda == 0.0) {
        out.diagnostic = "premium is identically zero when lambda = 0";
        return out;
    }
    const double bracket = dc.kappa * dc.kappa * dc.beta2 * (dc.beta2 - 1.0) - 2.0 * p.r;
    if (bracket >= 0.0) {
        out.diagnostic = "kappa^2 beta2 (beta2-1) >= 2r: premium negative everywhere";
        return out;
    }
    const HSlice hs = s.dual().slice(h);
    auto gap = [&](double y) {
        return std::pow(y / p.K, dc.beta2 - 1.0) + s.dual().v_y(y, hs, DualRegion::R3);
    };
    double lo = hs.y3, hi = hs.y2;
    const double glo = gap(lo), ghi = gap(hi);
    if (!(glo > 0.0) || !(ghi < 0.0)) {
        out.diagnostic = "no sign change of b - x inside the peak region";
        return out;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (gap(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-14 * hi) break;
    }
    const double y_star = 0.5 * (lo + hi);
    out.x_star = -s.dual().v_y(y_star, hs, DualRegion::R3);
    out.diagnostic = "threshold found in the peak region";
    return out;
}

}  // namespace lifecycle
