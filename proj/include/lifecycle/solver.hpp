#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "lifecycle/dual.hpp"
#include "lifecycle/model.hpp"

namespace lifecycle {

// Wealth thresholds separating the consumption regimes at a given h.
struct BoundarySet {
    double x_bound;  // nu h / (r + lambda), absorbing floor
    double x_low;    // below: c = nu h
    double x_aggr;   // above: c = h
    double x_lavs;   // ratchet boundary, upper edge of the effective domain
};

enum class PrimalRegion { Floor, Constrained, Interior, Peak, Ratchet, Jump };

inline const char* to_string(PrimalRegion r) {
    switch (r) {
        case PrimalRegion::Floor: return "floor";
        case PrimalRegion::Constrained: return "constrained";
        case PrimalRegion::Interior: return "interior";
        case PrimalRegion::Peak: return "peak";
        case PrimalRegion::Ratchet: return "ratchet";
        default: return "jump";
    }
}

// Inverts the dual map and evaluates primal quantities. Pure and
// thread-safe; every query is solved fresh by bracketed bisection.
class Solver {
  public:
    explicit Solver(const ModelParams& params) : dual_(params) {
        init_xlavs_powerlaw();
        verify_ratchet_monotone();
    }
    explicit Solver(DualSolution dual) : dual_(std::move(dual)) {
        init_xlavs_powerlaw();
        verify_ratchet_monotone();
    }

    const DualSolution& dual() const { return dual_; }
    const ModelParams& params() const { return dual_.params(); }
    const DerivedConstants& constants() const { return dual_.constants(); }

    BoundarySet boundary_curves(const HSlice& s) const {
        BoundarySet out;
        out.x_bound = s.lin1;  // nu h / (r + lambda)
        out.x_low = params().nu > 0.0 ? -dual_.v_y(s.y1, s, DualRegion::R1) : out.x_bound;
        out.x_aggr = -dual_.v_y(s.y2, s, DualRegion::R2);
        out.x_lavs = -dual_.v_y(s.y3, s, DualRegion::R3);
        return out;
    }
    BoundarySet boundary_curves(double h) const { return boundary_curves(dual_.slice(h)); }

    // Region of a wealth level against the threshold curves; seams within
    // 1e-12 relative follow the closed/open case conventions (Constrained on
    // [x_bound, x_low), Interior on [x_low, x_aggr], Peak on (x_aggr, x_lavs)).
    PrimalRegion region_of(double x, const BoundarySet& bs) const {
        const double tol = 1e-12;
        if (std::fabs(x - bs.x_bound) <= tol * std::max(1.0, bs.x_bound)) return PrimalRegion::Floor;
        if (x < bs.x_bound) throw admissibility_error("wealth below the floor nu*h/(r+lambda)");
        if (x > bs.x_lavs * (1.0 + tol)) return PrimalRegion::Jump;
        if (std::fabs(x - bs.x_lavs) <= tol * bs.x_lavs) return PrimalRegion::Ratchet;
        if (x < bs.x_low * (1.0 - tol)) return PrimalRegion::Constrained;
        if (x <= bs.x_aggr * (1.0 + tol)) return PrimalRegion::Interior;
        return PrimalRegion::Peak;
    }
    PrimalRegion region_of(double x, double h) const {
        return region_of(x, boundary_curves(h));
    }

    // Solves -v_y(y,h) = x for y inside the bracket of the given dual region.
    // Bisection on the strictly decreasing map; relative tolerance 1e-12,
    // iteration cap 200. A bracket failure signals a convexity violation or a
    // region mismatch and is a hard error.
    double invert_dual(double x, const HSlice& s, DualRegion reg) const {
        double lo, hi;
        auto grow_upper = [&](double start, DualRegion r) {
            double top = 2.0 * start;
            int grow = 0;
            while (-dual_.v_y(top, s, r) > x) {
                top *= 2.0;
                if (++grow > 2000) throw numeric_error("invert_dual: bracket growth failed");
            }
            return top;
        };
        if (reg == DualRegion::R1) {
            if (!(params().nu > 0.0)) throw numeric_error("region R1 is empty when nu = 0");
            lo = s.y1;
            hi = grow_upper(s.y1, DualRegion::R1);
        } else if (reg == DualRegion::R2) {
            lo = s.y2;
            // with nu = 0 the region extends to arbitrarily large y
            hi = std::isfinite(s.y1) ? s.y1 : grow_upper(s.y2, DualRegion::R2);
        } else {
            lo = s.y3;
            hi = s.y2;
        }
        const double fl = -dual_.v_y(lo, s, reg), fh = -dual_.v_y(hi, s, reg);
        const double slack = 1e-9 * std::max(1.0, std::fabs(x));
        if (x > fl + slack || x < fh - slack)
            throw numeric_error("invert_dual: x outside the region bracket");
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (-dual_.v_y(mid, s, reg) > x)
                lo = mid;
            else
                hi = mid;
            if (hi - lo <= 1e-12 * hi) break;
        }
        return 0.5 * (lo + hi);
    }
    double invert_dual(double x, double h, DualRegion reg) const {
        return invert_dual(x, dual_.slice(h), reg);
    }

    static DualRegion dual_region_of(PrimalRegion reg) {
        switch (reg) {
            case PrimalRegion::Constrained: return DualRegion::R1;
            case PrimalRegion::Interior: return DualRegion::R2;
            case PrimalRegion::Peak:
            case PrimalRegion::Ratchet: return DualRegion::R3;
            default: throw admissibility_error("no interior dual point for this state");
        }
    }

    // Dual point of an admissible non-floor (x,h).
    double dual_point(double x, const HSlice& s, PrimalRegion reg) const {
        return invert_dual(x, s, dual_region_of(reg));
    }
    double dual_point(double x, double h, PrimalRegion reg) const {
        return dual_point(x, dual_.slice(h), reg);
    }

    // Inverse of the ratchet boundary: the unique h with x_lavs(h) = x.
    double h_tilde(double x) const {
        if (!(x > 0.0)) throw admissibility_error("h_tilde requires x > 0");
        double lo = x * 1e-6, hi = x * 1e6;
        int grow = 0;
        while (xlavs_(lo) > x) {
            lo *= 0.5;
            if (++grow > 2000) throw numeric_error("h_tilde: lower bracket growth failed");
        }
        grow = 0;
        while (xlavs_(hi) < x) {
            hi *= 2.0;
            if (++grow > 2000) throw numeric_error("h_tilde: upper bracket growth failed");
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = std::sqrt(lo * hi);
            if (xlavs_(mid) < x)
                lo = mid;
            else
                hi = mid;
            if (hi - lo <= 1e-12 * hi) break;
        }
        // return the side with x_lavs(h) >= x so a projected state never
        // lands outside the effective domain
        return hi;
    }

    // Primal value u(x,h) = v(f(x,h),h) + x f(x,h) on [x_bound, x_lavs].
    double value_u(double x, double h) const {
        const HSlice s = dual_.slice(h);
        const BoundarySet bs = boundary_curves(s);
        const PrimalRegion reg = region_of(x, bs);
        if (reg == PrimalRegion::Jump)
            throw admissibility_error("value_u requires x <= x_lavs(h); apply the initial jump first");
        if (reg == PrimalRegion::Floor) {
            const ModelParams& p = params();
            return std::pow(p.nu, p.gamma1) * std::pow(h, (1.0 - p.alpha) * p.gamma1) /
                   ((p.r + p.lambda) * p.gamma1);
        }
        const double y = dual_point(x, s, reg);
        return dual_.v(y, s, dual_region_of(reg)) + x * y;
    }

    // Large-h slope of the ratchet boundary, lim x_lavs(h)/h, read off the
    // power-law representation.
    double xlavs_linear_slope() const {
        // the bequest term contributes only when its power is exactly linear
        return xlavs_lin_ + (std::fabs(xlavs_q_ - 1.0) < 1e-12 ? xlavs_bq_ : 0.0);
    }

  private:
    // x_lavs(h) collapses to a two-term power law A h + B h^q; h_tilde
    // bisects on this cheap form. It agrees with the slice evaluation to
    // machine precision.
    void init_xlavs_powerlaw() {
        const CoefficientSet co = dual_.coefficients();
        const ModelParams& p = params();
        const DerivedConstants& dc = constants();
        const double oma = 1.0 - p.alpha;
        xlavs_lin_ = -co.c5.scale * dc.r1 * std::pow(oma, dc.r1 - 1.0) -
                     co.c6.scale * dc.r2 * std::pow(oma, dc.r2 - 1.0) + 1.0 / (p.r + p.lambda);
        xlavs_bq_ = -dc.beta2 * dual_.bequest_coef() * std::pow(oma, dc.beta2 - 1.0);
        xlavs_q_ = (dc.beta2 - 1.0) * dual_.boundary_exponent();
    }

    double xlavs_(double h) const {
        return xlavs_lin_ * h + (xlavs_bq_ != 0.0 ? xlavs_bq_ * std::pow(h, xlavs_q_) : 0.0);
    }

    void verify_ratchet_monotone() const {
        double prev = xlavs_(1e-4);
        for (int i = 1; i <= 24; ++i) {
            const double h = 1e-4 * std::pow(10.0, i / 3.0);
            const double cur = xlavs_(h);
            if (!(cur > prev))
                throw numeric_error("x_lavs is not strictly increasing on the working range");
            prev = cur;
        }
    }

    DualSolution dual_;
    double xlavs_lin_ = 0.0;  // linear coefficient of x_lavs(h)
    double xlavs_bq_ = 0.0;   // bequest-term coefficient of x_lavs(h)
    double xlavs_q_ = 0.0;    // bequest-term exponent of x_lavs(h)
};

}  // namespace lifecycle
