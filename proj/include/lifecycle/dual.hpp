#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "lifecycle/model.hpp"

namespace lifecycle {

// A pure power of the reference level: scale * h^exponent.
struct PowerLaw {
    double scale = 0.0;
    double exponent = 0.0;
    double operator()(double h) const { return scale * std::pow(h, exponent); }
    // d/dh as another power law
    PowerLaw derivative() const { return {scale * exponent, exponent - 1.0}; }
};

// The five h-dependent coefficients of the dual value function.
struct CoefficientSet {
    PowerLaw c2, c3, c4, c5, c6;
};

// Dual free-boundary points for a given h, in marginal-utility units.
// y3 < y2 < y1; consumption sits at the drawdown floor above y1, at the
// reference level below y2, and the reference ratchets at y3.
struct DualBoundaries {
    double y1;  // nu^{g1-1} h^{(1-alpha)g1-1}; +inf when nu = 0
    double y2;  // h^{(1-alpha)g1-1}
    double y3;  // (1-alpha) h^{(1-alpha)g1-1}
};

enum class DualRegion { R1, R2, R3, D2Boundary };

inline const char* to_string(DualRegion r) {
    switch (r) {
        case DualRegion::R1: return "R1";
        case DualRegion::R2: return "R2";
        case DualRegion::R3: return "R3";
        default: return "D2-boundary";
    }
}

// Everything h-dependent evaluated once, so repeated queries at the same
// reference level (bisection loops, simulation steps) pay only for powers
// of y.
struct HSlice {
    double h;
    double y1, y2, y3;
    double c2v, c3v, c4v, c5v, c6v;       // coefficient values at h
    double dc2v, dc3v, dc4v, dc5v, dc6v;  // their h-derivatives at h
    double aconsv, daconsv;               // y^{beta1} particular coefficient
    double const1;                        // nu^g1 h^{(1-a)g1} / ((r+l) g1)
    double const3;                        // h^{(1-a)g1} / ((r+l) g1)
    double lin1;                          // nu h / (r+l)
    double lin3;                          // h / (r+l)
    double dconst1;                       // d/dh of const1 * gamma1-normalized term
    double dconst3;                       // (1-alpha) h^{(1-a)g1-1} / (r+l)
};

// Closed-form dual value function v(y,h) and its partial derivatives.
// Coefficients are stored as (scale, exponent) power laws of h, which keeps
// large-h evaluation stable and makes scaling identities exact.
class DualSolution {
  public:
    explicit DualSolution(const ModelParams& params)
        : p_(params), dc_(derive_constants(params)) {
        require_assumption_a1(p_, dc_);
        init_coefficients();
    }

    // Test hook: replace coefficient scales (exponents stay fixed by the
    // model constants).
    DualSolution perturbed(double s2, double s3, double s4, double s5, double s6) const {
        DualSolution d = *this;
        d.co_.c2.scale = s2;
        d.co_.c3.scale = s3;
        d.co_.c4.scale = s4;
        d.co_.c5.scale = s5;
        d.co_.c6.scale = s6;
        return d;
    }

    const ModelParams& params() const { return p_; }
    const DerivedConstants& constants() const { return dc_; }
    CoefficientSet coefficients() const { return co_; }

    // Exponent of h in the dual boundary points: (1-alpha)*gamma1 - 1 < 0.
    double boundary_exponent() const { return ey_; }
    // Coefficient of the bequest particular solution (the y^{beta2} term).
    double bequest_coef() const { return abq_; }
    // The y^{beta1} particular term in region R2 as a power law of h.
    PowerLaw consumption_coef() const { return acons_; }

    HSlice slice(double h) const {
        require_positive_h(h);
        HSlice s;
        s.h = h;
        s.y2 = std::pow(h, ey_);
        s.y1 = p_.nu > 0.0 ? std::pow(p_.nu, p_.gamma1 - 1.0) * s.y2
                           : std::numeric_limits<double>::infinity();
        s.y3 = (1.0 - p_.alpha) * s.y2;
        s.c2v = co_.c2(h);
        s.c3v = co_.c3(h);
        s.c4v = co_.c4(h);
        s.c5v = co_.c5(h);
        s.c6v = co_.c6(h);
        s.dc2v = co_.c2.derivative()(h);
        s.dc3v = co_.c3.derivative()(h);
        s.dc4v = co_.c4.derivative()(h);
        s.dc5v = co_.c5.derivative()(h);
        s.dc6v = co_.c6.derivative()(h);
        s.aconsv = acons_(h);
        s.daconsv = acons_.derivative()(h);
        const double hpow = s.y2 * h;  // h^{(1-alpha) gamma1}
        s.const1 = p_.nu > 0.0 ? std::pow(p_.nu, p_.gamma1) * hpow / (rl_ * p_.gamma1) : 0.0;
        s.const3 = hpow / (rl_ * p_.gamma1);
        s.lin1 = p_.nu * h / rl_;
        s.lin3 = h / rl_;
        s.dconst1 = p_.nu > 0.0 ? std::pow(p_.nu, p_.gamma1) * (1.0 - p_.alpha) * s.y2 / rl_ : 0.0;
        s.dconst3 = (1.0 - p_.alpha) * s.y2 / rl_;
        return s;
    }

    DualBoundaries boundaries(double h) const {
        const HSlice s = slice(h);
        return {s.y1, s.y2, s.y3};
    }

    // Region membership with closed-side assignment; a point within 1e-12
    // relative of a boundary belongs to the closed region R2 (or to the
    // ratchet boundary at y3). y below y3 is the initial-jump region and is
    // rejected here.
    DualRegion region(double y, const HSlice& s) const {
        const double tol = 1e-12;
        if (std::fabs(y - s.y3) <= tol * s.y3) return DualRegion::D2Boundary;
        if (y < s.y3) throw admissibility_error("y below the ratchet boundary y3(h)");
        if (std::isfinite(s.y1) && y > s.y1 * (1.0 + tol)) return DualRegion::R1;
        if (y >= s.y2 * (1.0 - tol)) return DualRegion::R2;
        return DualRegion::R3;
    }
    DualRegion region(double y, double h) const { return region(y, slice(h)); }

    double v(double y, const HSlice& s, DualRegion reg) const {
        const double bq = abq_ != 0.0 ? abq_ * std::pow(y, dc_.beta2) : 0.0;
        switch (reg) {
            case DualRegion::R1:
                return s.c2v * std::pow(y, dc_.r2) + bq + s.const1 - s.lin1 * y;
            case DualRegion::R2:
                return s.c3v * std::pow(y, dc_.r1) + s.c4v * std::pow(y, dc_.r2) + bq +
                       s.aconsv * std::pow(y, dc_.beta1);
            default:
                return s.c5v * std::pow(y, dc_.r1) + s.c6v * std::pow(y, dc_.r2) + bq + s.const3 -
                       s.lin3 * y;
        }
    }

    double v_y(double y, const HSlice& s, DualRegion reg) const {
        const double bq =
            abq_ != 0.0 ? dc_.beta2 * abq_ * std::pow(y, dc_.beta2 - 1.0) : 0.0;
        switch (reg) {
            case DualRegion::R1:
                return dc_.r2 * s.c2v * std::pow(y, dc_.r2 - 1.0) + bq - s.lin1;
            case DualRegion::R2:
                return dc_.r1 * s.c3v * std::pow(y, dc_.r1 - 1.0) +
                       dc_.r2 * s.c4v * std::pow(y, dc_.r2 - 1.0) + bq +
                       dc_.beta1 * s.aconsv * std::pow(y, dc_.beta1 - 1.0);
            default:
                return dc_.r1 * s.c5v * std::pow(y, dc_.r1 - 1.0) +
                       dc_.r2 * s.c6v * std::pow(y, dc_.r2 - 1.0) + bq - s.lin3;
        }
    }

    double v_yy(double y, const HSlice& s, DualRegion reg) const {
        const double rr = 2.0 * rl_ / (dc_.kappa * dc_.kappa);  // r1(r1-1) = r2(r2-1)
        const double bq =
            abq_ != 0.0 ? dc_.beta2 * (dc_.beta2 - 1.0) * abq_ * std::pow(y, dc_.beta2 - 2.0) : 0.0;
        switch (reg) {
            case DualRegion::R1:
                return rr * s.c2v * std::pow(y, dc_.r2 - 2.0) + bq;
            case DualRegion::R2:
                return rr * (s.c3v * std::pow(y, dc_.r1 - 2.0) + s.c4v * std::pow(y, dc_.r2 - 2.0)) +
                       bq + dc_.beta1 * (dc_.beta1 - 1.0) * s.aconsv * std::pow(y, dc_.beta1 - 2.0);
            default:
                return rr * (s.c5v * std::pow(y, dc_.r1 - 2.0) + s.c6v * std::pow(y, dc_.r2 - 2.0)) +
                       bq;
        }
    }

    double v_h(double y, const HSlice& s, DualRegion reg) const {
        switch (reg) {
            case DualRegion::R1:
                return s.dc2v * std::pow(y, dc_.r2) + s.dconst1 - p_.nu / rl_ * y;
            case DualRegion::R2:
                return s.dc3v * std::pow(y, dc_.r1) + s.dc4v * std::pow(y, dc_.r2) +
                       s.daconsv * std::pow(y, dc_.beta1);
            default:
                return s.dc5v * std::pow(y, dc_.r1) + s.dc6v * std::pow(y, dc_.r2) + s.dconst3 -
                       y / rl_;
        }
    }

    double v(double y, double h, DualRegion reg) const { return v(y, slice(h), reg); }
    double v_y(double y, double h, DualRegion reg) const { return v_y(y, slice(h), reg); }
    double v_yy(double y, double h, DualRegion reg) const { return v_yy(y, slice(h), reg); }
    double v_h(double y, double h, DualRegion reg) const { return v_h(y, slice(h), reg); }

    double v(double y, double h) const { return dispatch(&DualSolution::v, y, h); }
    double v_y(double y, double h) const { return dispatch(&DualSolution::v_y, y, h); }
    double v_yy(double y, double h) const { return dispatch(&DualSolution::v_yy, y, h); }
    double v_h(double y, double h) const { return dispatch(&DualSolution::v_h, y, h); }

    // Dual transform of the bequest utility alone: lambda sup_b [V(b) - b q].
    double bequest_dual(double q) const {
        return bq_dual_scale_ != 0.0 ? bq_dual_scale_ * std::pow(q, dc_.beta2) : 0.0;
    }

    // Dual transform of the running utility, sup over the constrained
    // consumption and bequest choices. Three branches matching the dual
    // regions of q.
    double v_tilde(double q, double h) const {
        require_positive_h(h);
        if (!(q > 0.0)) throw admissibility_error("v_tilde requires q > 0");
        const double bq = bq_dual_scale_ != 0.0 ? bq_dual_scale_ * std::pow(q, dc_.beta2) : 0.0;
        const HSlice s = slice(h);
        if (q > s.y1)
            return bq + std::pow(p_.nu, p_.gamma1) * std::pow(h, ey_ + 1.0) / p_.gamma1 -
                   p_.nu * h * q;
        if (q >= s.y2)
            return bq + (1.0 - p_.gamma1) / p_.gamma1 * std::pow(h, p_.alpha * dc_.beta1) *
                            std::pow(q, dc_.beta1);
        return bq + std::pow(h, ey_ + 1.0) / p_.gamma1 - h * q;
    }

  private:
    using Member = double (DualSolution::*)(double, const HSlice&, DualRegion) const;
    double dispatch(Member m, double y, double h) const {
        const HSlice s = slice(h);
        DualRegion reg = region(y, s);
        if (reg == DualRegion::D2Boundary) reg = DualRegion::R3;
        return (this->*m)(y, s, reg);
    }

    static void require_positive_h(double h) {
        if (!(h > 0.0)) throw admissibility_error("reference level h must be positive");
    }

    void init_coefficients() {
        const double r1 = dc_.r1, r2 = dc_.r2, b1 = dc_.beta1, b2 = dc_.beta2;
        const double g1 = p_.gamma1, al = p_.alpha, nu = p_.nu, K = p_.K, lam = p_.lambda;
        rl_ = p_.r + lam;
        ey_ = (1.0 - al) * g1 - 1.0;
        const double eA = r1 * (1.0 - al) * g1 + r2;  // exponent of C2, C4, C6
        const double eB = r2 * (1.0 - al) * g1 + r1;  // exponent of C3, C5
        const double den35 = rl_ * (r1 - r2) * (b1 - r1);
        const double den246 = rl_ * (r1 - r2) * (b1 - r2);
        const double nuP = nu > 0.0 ? std::pow(nu, r2 * g1 + r1) : 0.0;

        co_.c3 = {(1.0 - b1) / den35 * nuP, eB};
        co_.c5 = {(1.0 - b1) * (nuP - 1.0) / den35, eB};
        co_.c6 = {std::pow(1.0 - al, r1 - r2) * (1.0 - b1) * (r2 * (1.0 - al) * g1 + r1) *
                      (1.0 - nuP) / (den35 * (r1 * (1.0 - al) * g1 + r2)),
                  eA};
        co_.c4 = {co_.c6.scale + (b1 - 1.0) / den246, eA};
        // The region above y1 is empty when nu = 0; its coefficient diverges
        // and must never be evaluated.
        co_.c2 = {nu > 0.0 ? co_.c4.scale + (1.0 - b1) / den246 * std::pow(nu, r1 * g1 + r2)
                           : std::numeric_limits<double>::quiet_NaN(),
                  eA};

        const double k2 = dc_.kappa * dc_.kappa;
        abq_ = lam > 0.0 ? 2.0 * lam * std::pow(K, 1.0 - b2) / (k2 * b2 * (b2 - r1) * (b2 - r2))
                         : 0.0;
        bq_dual_scale_ = lam > 0.0 ? lam * std::pow(K, 1.0 - b2) * (1.0 - p_.gamma2) / p_.gamma2
                                   : 0.0;
        acons_ = {2.0 / (k2 * b1 * (b1 - r1) * (b1 - r2)), al * b1};
    }

    ModelParams p_;
    DerivedConstants dc_;
    CoefficientSet co_;
    PowerLaw acons_;              // y^{beta1} particular term, power law in h
    double abq_ = 0.0;            // y^{beta2} particular term in v
    double bq_dual_scale_ = 0.0;  // q^{beta2} term of v_tilde
    double rl_ = 0.0;             // r + lambda
    double ey_ = 0.0;             // (1-alpha)*gamma1 - 1
};

}  // namespace lifecycle
