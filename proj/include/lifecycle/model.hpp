#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace lifecycle {

// Thrown when model parameters violate their admissible ranges or joint
// restrictions. The message names the violated condition.
struct validation_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when a state (x,h) lies outside the feasible wealth region.
struct admissibility_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Thrown on bracket failures, NaN propagation and similar numerical faults.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Market, preference, mortality and bequest parameters. Units are annual.
struct ModelParams {
    double r      = 0.05;  // risk-free rate
    double mu     = 0.10;  // risky drift
    double sigma  = 0.25;  // risky volatility, > 0
    double rho    = 0.05;  // discount rate, must equal r
    double lambda = 0.03;  // force of mortality, >= 0
    double nu     = 0.20;  // drawdown fraction, in [0,1)
    double gamma1 = 0.50;  // consumption risk aversion, in (0,1)
    double gamma2 = 0.10;  // bequest risk aversion, in (0,1)
    double alpha  = 0.70;  // shortfall-aversion weight, in [0,1)
    double K      = 5.0;   // bequest motive level, > 0

    void validate() const {
        if (!(sigma > 0.0)) throw validation_error("sigma must be positive");
        if (!(mu > r)) throw validation_error("mu must exceed r");
        if (rho != r) throw validation_error("rho must equal r");
        if (!(lambda >= 0.0)) throw validation_error("lambda must be nonnegative");
        if (!(nu >= 0.0 && nu < 1.0)) throw validation_error("nu must lie in [0,1)");
        if (!(gamma1 > 0.0 && gamma1 < 1.0)) throw validation_error("gamma1 must lie in (0,1)");
        if (!(gamma2 > 0.0 && gamma2 < 1.0)) throw validation_error("gamma2 must lie in (0,1)");
        if (!(alpha >= 0.0 && alpha < 1.0)) throw validation_error("alpha must lie in [0,1)");
        if (!(K > 0.0)) throw validation_error("K must be positive");
        for (double v : {r, mu, sigma, rho, lambda, nu, gamma1, gamma2, alpha, K})
            if (!std::isfinite(v)) throw validation_error("parameters must be finite");
    }
};

// Constants derived from ModelParams: the Sharpe ratio, the roots of
// eta^2 - eta - 2(r+lambda)/kappa^2 = 0 and the dual exponents.
struct DerivedConstants {
    double kappa;  // (mu - r) / sigma, > 0
    double r1;     // larger root, > 1
    double r2;     // smaller root, < 0
    double beta1;  // gamma1 / (gamma1 - 1), < 0
    double beta2;  // gamma2 / (gamma2 - 1), < 0
};

inline DerivedConstants derive_constants(const ModelParams& p) {
    p.validate();
    DerivedConstants dc;
    dc.kappa = (p.mu - p.r) / p.sigma;
    const double q = 2.0 * (p.r + p.lambda) / (dc.kappa * dc.kappa);
    const double disc = std::sqrt(1.0 + 4.0 * q);
    dc.r1 = 0.5 * (1.0 + disc);
    dc.r2 = 0.5 * (1.0 - disc);
    dc.beta1 = p.gamma1 / (p.gamma1 - 1.0);
    dc.beta2 = p.gamma2 / (p.gamma2 - 1.0);
    return dc;
}

struct AssumptionReport {
    bool ok = false;
    bool clause_bequest = false;     // gamma2 <= (1-alpha)*gamma1
    bool clause_root_ratio = false;  // (1-alpha)*gamma1 < -r2/r1
    bool clause_distinct = false;    // |-r2/r1 - gamma1| > 1e-9
    std::string detail;
};

// Checks the parameter restriction required by the closed-form solution:
// gamma2 <= (1-alpha)*gamma1 < -r2/r1 != gamma1. The inequality against
// gamma1 is tested to a 1e-9 tolerance since exact equality is meaningless
// in floating point.
inline AssumptionReport check_assumption_a1(const ModelParams& p, const DerivedConstants& dc) {
    AssumptionReport rep;
    const double g1s = (1.0 - p.alpha) * p.gamma1;
    const double ratio = -dc.r2 / dc.r1;
    rep.clause_bequest = p.gamma2 <= g1s;
    rep.clause_root_ratio = g1s < ratio;
    rep.clause_distinct = std::fabs(ratio - p.gamma1) > 1e-9;
    rep.ok = rep.clause_bequest && rep.clause_root_ratio && rep.clause_distinct;
    rep.detail = "gamma2<=(1-alpha)*gamma1: " + std::string(rep.clause_bequest ? "ok" : "violated") +
                 "; (1-alpha)*gamma1<-r2/r1: " + std::string(rep.clause_root_ratio ? "ok" : "violated") +
                 "; -r2/r1!=gamma1: " + std::string(rep.clause_distinct ? "ok" : "violated");
    return rep;
}

inline void require_assumption_a1(const ModelParams& p, const DerivedConstants& dc) {
    const AssumptionReport rep = check_assumption_a1(p, dc);
    if (!rep.ok) throw validation_error("parameter restriction failed: " + rep.detail);
}

// Consumption utility with reference level h: (c/h^alpha)^g1 / g1 below the
// reference, c^{(1-alpha) g1} / g1 at or above it. Continuous at c = h with a
// concave kink.
inline double utility_u(const ModelParams& p, double c, double h) {
    if (!(h > 0.0)) throw admissibility_error("utility_u requires h > 0");
    if (c < p.nu * h) throw admissibility_error("utility_u requires c >= nu*h");
    if (c >= h) return std::pow(c, (1.0 - p.alpha) * p.gamma1) / p.gamma1;
    return std::pow(c / std::pow(h, p.alpha), p.gamma1) / p.gamma1;
}

// Bequest utility K b^g2 / g2, with the b = 0 limit value 0.
inline double utility_v(const ModelParams& p, double b) {
    if (b < 0.0) throw admissibility_error("utility_v requires b >= 0");
    if (b == 0.0) return 0.0;
    return p.K * std::pow(b, p.gamma2) / p.gamma2;
}

}  // namespace lifecycle
