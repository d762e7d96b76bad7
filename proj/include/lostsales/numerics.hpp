#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>

namespace lostsales {

// Thrown when an iteration leaves the numerically tractable regime
// (series that cannot converge, exhausted subdivision budgets, decay
// rates indistinguishable from 1). Distinct from precondition violations,
// which throw std::invalid_argument.
class numerical_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

// Lower incomplete gamma by power series, valid for x < a + 1.
inline double gamma_series(double a, double x) {
    const double eps = std::numeric_limits<double>::epsilon();
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int i = 0; i < 10000; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * eps) {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw numerical_error("incomplete gamma series did not converge");
}

// Upper incomplete gamma by Lentz continued fraction, valid for x >= a + 1.
inline double gamma_cont_frac(double a, double x) {
    const double eps = std::numeric_limits<double>::epsilon();
    const double fpmin = std::numeric_limits<double>::min() / eps;
    double b = x + 1.0 - a;
    double c = 1.0 / fpmin;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = b + an / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) <= eps) {
            return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
        }
    }
    throw numerical_error("incomplete gamma continued fraction did not converge");
}

}  // namespace detail

// Regularized lower incomplete gamma P(a, x); series/continued-fraction
// switch at the usual x = a + 1 threshold.
inline double reg_lower_gamma(double a, double x) {
    if (!(a > 0.0) || std::isnan(x)) {
        throw std::invalid_argument("reg_lower_gamma requires a > 0");
    }
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) return detail::gamma_series(a, x);
    return 1.0 - detail::gamma_cont_frac(a, x);
}

// CDF of the sum of n i.i.d. exponential(rate) variables.
inline double erlang_cdf(int n, double rate, double x) {
    if (x <= 0.0) return 0.0;
    return reg_lower_gamma(static_cast<double>(n), rate * x);
}

namespace detail {

template <typename F>
double simpson_panel(F&& f, double a, double fa, double b, double fb, double m, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive_simpson_rec(F&& f, double a, double fa, double b, double fb, double m,
                            double fm, double whole, double tol, long& budget) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    budget -= 2;
    const double left = simpson_panel(f, a, fa, m, fm, lm, flm);
    const double right = simpson_panel(f, m, fm, b, fb, rm, frm);
    const double delta = left + right - whole;
    if (std::fabs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    if (budget <= 0) {
        throw numerical_error("adaptive Simpson subdivision budget exhausted");
    }
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, budget) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, budget);
}

}  // namespace detail

// Adaptive Simpson quadrature with absolute tolerance; max_intervals caps
// the total number of subdivisions.
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double abs_tol, long max_intervals = 1000000) {
    if (!(b > a)) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    long budget = max_intervals;
    const double whole = detail::simpson_panel(f, a, fa, b, fb, m, fm);
    return detail::adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, abs_tol, budget);
}

struct ScalarMin {
    double x = 0.0;
    double fx = 0.0;
    double bracket_width = 0.0;
    long evals = 0;
};

// Golden-section search on [lo, hi]; stops when the bracket is narrower
// than x_tol. Assumes f is unimodal on the interval.
template <typename F>
ScalarMin golden_section_min(F&& f, double lo, double hi, double x_tol) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    long evals = 2;
    while (b - a > x_tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        ++evals;
    }
    ScalarMin out;
    out.bracket_width = b - a;
    out.evals = evals;
    if (fc < fd) {
        out.x = c;
        out.fx = fc;
    } else {
        out.x = d;
        out.fx = fd;
    }
    return out;
}

// For convex f with minimum value f_hat at x_hat, returns the leftmost
// point of {x in [lo, x_hat] : f(x) <= f_hat + f_tol} by bisection on the
// level-set boundary. Used to report the infimum of a flat argmin set.
template <typename F>
double leftmost_at_min(F&& f, double lo, double x_hat, double f_hat, double f_tol, double x_tol) {
    if (x_hat <= lo) return lo;
    if (f(lo) <= f_hat + f_tol) return lo;
    double a = lo, b = x_hat;  // f(a) above the level set, f(b) inside
    while (b - a > x_tol) {
        const double m = 0.5 * (a + b);
        if (f(m) <= f_hat + f_tol) {
            b = m;
        } else {
            a = m;
        }
    }
    return b;
}

}  // namespace lostsales
