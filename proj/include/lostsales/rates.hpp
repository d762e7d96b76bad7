#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "lostsales/demand.hpp"
#include "lostsales/numerics.hpp"

namespace lostsales {

// Chernoff decay data for one order level r: gamma = inf_{theta >= 0}
// exp(theta r) E[exp(-theta D)], theta_star the minimizer. When the infimum
// is approached only as theta -> infinity, theta_star is +infinity and
// attained is false; consumers apply the 1/infinity = 0 convention.
struct RateInfo {
    double gamma = 0.0;
    double theta_star = 0.0;
    bool attained = true;
    double r_level = 0.0;
    double bracket_width = 0.0;  // width of the final search bracket (0 for closed forms)
};

// exp(theta r) E[exp(-theta D)]
inline double phi(const Demand& d, double r, double theta) {
    if (!(r >= 0.0)) throw std::invalid_argument("phi requires r >= 0");
    return std::exp(theta * r) * d.laplace(theta);
}

namespace detail {

inline double log_phi(const Demand& d, double r, double theta) {
    return theta * r + std::log(d.laplace(theta));
}

}  // namespace detail

// Numeric minimization of log phi over theta >= 0: geometric bracket
// expansion up to theta = 2^60, golden-section refinement once a rise is
// observed. log phi is strictly convex (positive variance), so a plateau
// can only be the asymptotic limit, which is the non-attained case.
inline RateInfo chernoff_rate_search(const Demand& d, double r) {
    if (!(r >= 0.0) || !(r < d.mean())) {
        throw std::invalid_argument("chernoff rate requires 0 <= r < E[D]");
    }
    const auto f = [&d, r](double theta) { return detail::log_phi(d, r, theta); };
    constexpr double theta_cap = 1152921504606846976.0;  // 2^60

    double prev_theta = 0.0;
    double prev_f = 0.0;  // log phi(0) = 0
    double best_theta = 0.0;
    double best_f = 0.0;
    double theta = 1.0;
    while (theta <= theta_cap) {
        const double ft = f(theta);
        if (ft < best_f) {
            best_f = ft;
            best_theta = theta;
        }
        if (ft > prev_f + 1e-13 * std::max(1.0, std::fabs(prev_f))) {
            // rise observed: minimum bracketed in [prev/2, theta]
            const double lo = prev_theta * 0.25;
            const double hi = theta;
            const auto m = golden_section_min(f, lo, hi, 1e-10 * std::max(1.0, hi));
            RateInfo out;
            out.gamma = std::exp(std::min(m.fx, best_f));
            out.theta_star = m.x;
            out.attained = true;
            out.r_level = r;
            out.bracket_width = m.bracket_width;
            return out;
        }
        prev_theta = theta;
        prev_f = ft;
        theta *= 2.0;
    }
    // still non-increasing at the cap: infimum not attained
    RateInfo out;
    out.gamma = std::exp(std::min(best_f, prev_f));
    out.theta_star = std::numeric_limits<double>::infinity();
    out.attained = false;
    out.r_level = r;
    return out;
}

// Chernoff rate at level r; exponential demand takes the closed form
// theta* = 1/r - rate, gamma = (r rate) exp(1 - r rate), others search.
// At r = 0 the transform decreases to P(D = 0), never attained.
inline RateInfo chernoff_rate(const Demand& d, double r) {
    if (!(r >= 0.0) || !(r < d.mean())) {
        throw std::invalid_argument("chernoff rate requires 0 <= r < E[D]");
    }
    if (r == 0.0) {
        RateInfo out;
        out.gamma = d.prob_at_zero();
        out.theta_star = std::numeric_limits<double>::infinity();
        out.attained = false;
        out.r_level = 0.0;
        return out;
    }
    if (const auto* e = d.if_exponential()) {
        const double rl = r * e->rate;
        RateInfo out;
        out.gamma = rl * std::exp(1.0 - rl);
        out.theta_star = 1.0 / r - e->rate;
        out.attained = true;
        out.r_level = r;
        return out;
    }
    return chernoff_rate_search(d, r);
}

// P(S_n <= n r), the probability the demand random walk stays below the
// cumulative-order line.
inline Estimate ruin_prob(const Demand& d, double r, int n) {
    if (!(r >= 0.0)) throw std::invalid_argument("ruin_prob requires r >= 0");
    return partial_sum_cdf(d, n, static_cast<double>(n) * r);
}

inline Estimate ruin_prob(PartialSums& ps, double r, int n) {
    if (!(r >= 0.0)) throw std::invalid_argument("ruin_prob requires r >= 0");
    return ps.cdf(n, static_cast<double>(n) * r);
}

struct SeriesSum {
    double value = 0.0;
    double error_bound = 0.0;
};

// Sum over n >= 1 of P(S_n <= n r), truncated once the Chernoff geometric
// tail gamma^{N+1} / (1 - gamma) drops below tol. The reported error bound
// is that tail plus any accumulated Monte Carlo standard error.
inline SeriesSum cramer_sum(const Demand& d, double r, double tol = 1e-9) {
    if (!(tol > 0.0)) throw std::invalid_argument("cramer_sum requires tol > 0");
    if (!(r >= 0.0) || !(r < d.mean())) {
        throw std::invalid_argument("cramer_sum requires 0 <= r < E[D]");
    }
    const double gamma = chernoff_rate(d, r).gamma;
    if (gamma >= 1.0 - 1e-9) {
        throw numerical_error("cramer_sum: chernoff rate too close to 1; series cannot be certified");
    }
    PartialSums ps(d);
    double sum = 0.0;
    double mc_err = 0.0;
    double gpow = gamma;  // gamma^n
    constexpr long max_terms = 2000000;
    for (long n = 1; n <= max_terms; ++n) {
        const auto term = ps.cdf(static_cast<int>(n), static_cast<double>(n) * r);
        sum += term.value;
        if (!term.exact) mc_err += term.std_err;
        gpow *= gamma;
        const double tail = gpow / (1.0 - gamma);
        if (tail <= tol) {
            return {sum, tail + mc_err};
        }
    }
    throw numerical_error("cramer_sum did not converge within the term budget");
}

}  // namespace lostsales
