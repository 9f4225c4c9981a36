#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fracneu {

/// Critical fractional Sobolev exponent 2*_n = 2n/(n-2s) for 0<s<n/2, +inf otherwise.
double critical_exponent(int n, double s);

/// Model parameters of d(-Delta)^s u + u = g_{q,t0}(u) with Neumann condition
/// N_s u = 0 outside the ball. t0 = +inf selects the untruncated power t^{q-1}.
struct ProblemParams {
    int n = 1;
    double s = 0.45;
    double d = 1.0;
    double q = 4.0;
    double ell = 3.0;
    double t0 = std::numeric_limits<double>::infinity();

    bool hyp_q_subcritical_n = false;   // q < (2*_n + 2)/2
    bool hyp_q_subcritical_1 = false;   // q < (2*_1 + 2)/2
    bool hyp_q_above_threshold = false; // q > 2 + d*lambda2_r_plus (known after spectrum)

    bool truncated() const { return std::isfinite(t0); }

    void validate() const {
        if (n < 1) throw std::invalid_argument("ProblemParams: n must be >= 1");
        if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("ProblemParams: need 0 < s < 1");
        if (!(d > 0.0)) throw std::invalid_argument("ProblemParams: need d > 0");
        if (!(q > 2.0)) throw std::invalid_argument("ProblemParams: need q > 2");
        if (truncated()) {
            if (!(t0 > 1.0)) throw std::invalid_argument("ProblemParams: need t0 > 1");
            double cap = std::min(critical_exponent(n, s), q);
            if (!(ell > 2.0 && ell < cap))
                throw std::invalid_argument("ProblemParams: need 2 < ell < min{2*_n, q}");
        }
    }

    /// Fill the two q-range flags; the eigenvalue flag needs lambda2_r_plus.
    void set_hypothesis_flags(double lambda2_r_plus = std::numeric_limits<double>::quiet_NaN()) {
        hyp_q_subcritical_n = q < 0.5 * (critical_exponent(n, s) + 2.0);
        hyp_q_subcritical_1 = q < 0.5 * (critical_exponent(1, s) + 2.0);
        if (std::isfinite(lambda2_r_plus))
            hyp_q_above_threshold = q > 2.0 + d * lambda2_r_plus;
    }
};

}  // namespace fracneu
