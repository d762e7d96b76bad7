#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lostsales/numerics.hpp"
#include "lostsales/rng.hpp"

namespace lostsales {

// A value together with its Monte Carlo standard error. Exact results
// carry std_err = 0 and exact = true; results that went through a
// sampling fallback carry exact = false.
struct Estimate {
    double value = 0.0;
    double std_err = 0.0;
    bool exact = true;
};

struct ExponentialDemand {
    double rate;
};

struct DiscreteDemand {
    std::vector<double> values;  // sorted ascending
    std::vector<double> probs;
    std::vector<double> cum;     // inclusive prefix sums of probs
};

struct EmpiricalDemand {
    std::vector<double> sorted;  // sample values, ascending
};

// Non-negative demand distribution with finite, strictly positive mean and
// strictly positive variance. Exponential and finite-discrete kinds carry
// closed forms; the empirical kind is served by Monte Carlo only.
class Demand {
  public:
    enum class Kind { exponential, finite_discrete, empirical };

    static Demand exponential(double rate) {
        if (!(rate > 0.0) || !std::isfinite(rate)) {
            throw std::invalid_argument("exponential demand requires rate > 0");
        }
        Demand d;
        d.dist_ = ExponentialDemand{rate};
        d.mean_ = 1.0 / rate;
        d.variance_ = 1.0 / (rate * rate);
        return d;
    }

    static Demand finite_discrete(std::vector<std::pair<double, double>> atoms) {
        if (atoms.empty()) throw std::invalid_argument("discrete demand needs at least one atom");
        std::sort(atoms.begin(), atoms.end());
        DiscreteDemand dd;
        double total = 0.0;
        for (const auto& [v, q] : atoms) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw std::invalid_argument("discrete demand support must be non-negative and finite");
            }
            if (!(q >= 0.0) || !std::isfinite(q)) {
                throw std::invalid_argument("discrete demand probabilities must be non-negative");
            }
            if (q == 0.0) continue;
            total += q;
            if (!dd.values.empty() && v - dd.values.back() <= 1e-12 * std::max(1.0, v)) {
                dd.probs.back() += q;
            } else {
                dd.values.push_back(v);
                dd.probs.push_back(q);
            }
        }
        if (std::fabs(total - 1.0) > 1e-12) {
            throw std::invalid_argument("discrete demand probabilities must sum to 1 within 1e-12");
        }
        for (auto& q : dd.probs) q /= total;
        if (dd.values.size() < 2) {
            throw std::invalid_argument("demand must have strictly positive variance");
        }
        dd.cum.resize(dd.probs.size());
        double run = 0.0;
        for (std::size_t i = 0; i < dd.probs.size(); ++i) {
            run += dd.probs[i];
            dd.cum[i] = run;
        }
        dd.cum.back() = 1.0;
        double mean = 0.0, second = 0.0;
        for (std::size_t i = 0; i < dd.values.size(); ++i) {
            mean += dd.values[i] * dd.probs[i];
            second += dd.values[i] * dd.values[i] * dd.probs[i];
        }
        Demand d;
        d.mean_ = mean;
        d.variance_ = second - mean * mean;
        d.dist_ = std::move(dd);
        d.check_moments();
        return d;
    }

    static Demand empirical(std::vector<double> samples) {
        if (samples.empty()) throw std::invalid_argument("empirical demand needs at least one sample");
        for (double v : samples) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw std::invalid_argument("empirical demand values must be non-negative and finite");
            }
        }
        std::sort(samples.begin(), samples.end());
        double mean = 0.0;
        for (double v : samples) mean += v;
        mean /= static_cast<double>(samples.size());
        double var = 0.0;
        for (double v : samples) var += (v - mean) * (v - mean);
        var /= static_cast<double>(samples.size());
        Demand d;
        d.mean_ = mean;
        d.variance_ = var;
        d.dist_ = EmpiricalDemand{std::move(samples)};
        d.check_moments();
        return d;
    }

    Kind kind() const {
        if (std::holds_alternative<ExponentialDemand>(dist_)) return Kind::exponential;
        if (std::holds_alternative<DiscreteDemand>(dist_)) return Kind::finite_discrete;
        return Kind::empirical;
    }

    double mean() const { return mean_; }
    double variance() const { return variance_; }

    // E[exp(-theta D)] for theta >= 0.
    double laplace(double theta) const {
        if (!(theta >= 0.0)) throw std::invalid_argument("laplace transform requires theta >= 0");
        if (const auto* e = std::get_if<ExponentialDemand>(&dist_)) {
            return e->rate / (e->rate + theta);
        }
        if (const auto* dd = std::get_if<DiscreteDemand>(&dist_)) {
            double s = 0.0;
            for (std::size_t i = 0; i < dd->values.size(); ++i) {
                s += dd->probs[i] * std::exp(-theta * dd->values[i]);
            }
            return s;
        }
        const auto& emp = std::get<EmpiricalDemand>(dist_);
        double s = 0.0;
        for (double v : emp.sorted) s += std::exp(-theta * v);
        return s / static_cast<double>(emp.sorted.size());
    }

    // Right-continuous generalized inverse CDF: inf{x : F(x) >= q}.
    double quantile(double q) const {
        if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile requires q in (0, 1)");
        if (const auto* e = std::get_if<ExponentialDemand>(&dist_)) {
            return -std::log1p(-q) / e->rate;
        }
        if (const auto* dd = std::get_if<DiscreteDemand>(&dist_)) {
            auto it = std::lower_bound(dd->cum.begin(), dd->cum.end(), q);
            return dd->values[it - dd->cum.begin()];
        }
        const auto& emp = std::get<EmpiricalDemand>(dist_);
        const auto n = emp.sorted.size();
        const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n))) - 1;
        return emp.sorted[std::min(idx, n - 1)];
    }

    double cdf(double x) const {
        if (const auto* e = std::get_if<ExponentialDemand>(&dist_)) {
            return x <= 0.0 ? 0.0 : -std::expm1(-e->rate * x);
        }
        if (const auto* dd = std::get_if<DiscreteDemand>(&dist_)) {
            auto it = std::upper_bound(dd->values.begin(), dd->values.end(), x);
            if (it == dd->values.begin()) return 0.0;
            return dd->cum[it - dd->values.begin() - 1];
        }
        const auto& emp = std::get<EmpiricalDemand>(dist_);
        auto it = std::upper_bound(emp.sorted.begin(), emp.sorted.end(), x);
        return static_cast<double>(it - emp.sorted.begin()) / static_cast<double>(emp.sorted.size());
    }

    double prob_at_zero() const {
        if (std::holds_alternative<ExponentialDemand>(dist_)) return 0.0;
        return cdf(0.0);
    }

    double sample_one(Rng& rng) const {
        const double u = unit_double(rng);
        if (const auto* e = std::get_if<ExponentialDemand>(&dist_)) {
            return -std::log1p(-u) / e->rate;
        }
        if (const auto* dd = std::get_if<DiscreteDemand>(&dist_)) {
            auto it = std::upper_bound(dd->cum.begin(), dd->cum.end(), u);
            const auto idx = std::min<std::size_t>(it - dd->cum.begin(), dd->values.size() - 1);
            return dd->values[idx];
        }
        const auto& emp = std::get<EmpiricalDemand>(dist_);
        const auto idx = static_cast<std::size_t>(u * static_cast<double>(emp.sorted.size()));
        return emp.sorted[std::min(idx, emp.sorted.size() - 1)];
    }

    std::vector<double> sample(Rng& rng, std::size_t n) const {
        std::vector<double> out(n);
        for (auto& v : out) v = sample_one(rng);
        return out;
    }

    const ExponentialDemand* if_exponential() const { return std::get_if<ExponentialDemand>(&dist_); }
    const DiscreteDemand* if_discrete() const { return std::get_if<DiscreteDemand>(&dist_); }
    const EmpiricalDemand* if_empirical() const { return std::get_if<EmpiricalDemand>(&dist_); }

  private:
    Demand() = default;

    void check_moments() const {
        if (!(mean_ > 0.0) || !std::isfinite(mean_)) {
            throw std::invalid_argument("demand mean must be finite and strictly positive");
        }
        if (!(variance_ > 0.0)) {
            throw std::invalid_argument("demand must have strictly positive variance");
        }
    }

    std::variant<ExponentialDemand, DiscreteDemand, EmpiricalDemand> dist_;
    double mean_ = 0.0;
    double variance_ = 0.0;
};

// h E[(x - D)^+] + p E[(D - x)^+], the single-stage overage/underage cost.
inline double single_stage_cost(const Demand& d, double h, double p, double x) {
    double a;  // E[(x - D)^+]
    if (x <= 0.0) {
        a = 0.0;
    } else if (const auto* e = d.if_exponential()) {
        a = x - (-std::expm1(-e->rate * x)) / e->rate;
    } else if (const auto* dd = d.if_discrete()) {
        a = 0.0;
        for (std::size_t i = 0; i < dd->values.size() && dd->values[i] < x; ++i) {
            a += dd->probs[i] * (x - dd->values[i]);
        }
    } else {
        const auto& emp = *d.if_empirical();
        a = 0.0;
        for (double v : emp.sorted) {
            if (v >= x) break;
            a += x - v;
        }
        a /= static_cast<double>(emp.sorted.size());
    }
    return h * a + p * (d.mean() - x + a);
}

struct NewsvendorResult {
    double cost;      // g, the optimal single-stage cost
    double quantity;  // Q, the p/(p+h) demand quantile
};

inline NewsvendorResult newsvendor(const Demand& d, double h, double p) {
    if (!(h > 0.0) || !(p > 0.0)) throw std::invalid_argument("newsvendor requires h, p > 0");
    const double q = d.quantile(p / (p + h));
    if (const auto* e = d.if_exponential()) {
        return {h / e->rate * std::log1p(p / h), q};
    }
    return {single_stage_cost(d, h, p, q), q};
}

// Same quantities with the expected overage evaluated by quadrature of the
// CDF instead of the closed form; used as the independent route when
// cross-validating the bound pipeline.
inline NewsvendorResult newsvendor_numeric(const Demand& d, double h, double p) {
    if (!(h > 0.0) || !(p > 0.0)) throw std::invalid_argument("newsvendor requires h, p > 0");
    const double q = d.quantile(p / (p + h));
    double a = 0.0;  // E[(Q - D)^+] = integral of F over [0, Q]
    if (q > 0.0) {
        a = adaptive_simpson([&d](double s) { return d.cdf(s); }, 0.0, q, 1e-10);
    }
    return {h * a + p * (d.mean() - q + a), q};
}

namespace detail {

// Finite pmf sorted by value, with prefix sums so that P(S <= c) and
// E[S 1(S <= c)] are O(log n) lookups.
struct SortedPmf {
    std::vector<double> value;
    std::vector<double> prob;
    std::vector<double> cum_prob;
    std::vector<double> cum_mass;

    static SortedPmf point_mass_at_zero() {
        SortedPmf p;
        p.value = {0.0};
        p.prob = {1.0};
        p.cum_prob = {1.0};
        p.cum_mass = {0.0};
        return p;
    }

    void build_prefixes() {
        cum_prob.resize(prob.size());
        cum_mass.resize(prob.size());
        double cp = 0.0, cm = 0.0;
        for (std::size_t i = 0; i < prob.size(); ++i) {
            cp += prob[i];
            cm += value[i] * prob[i];
            cum_prob[i] = cp;
            cum_mass[i] = cm;
        }
    }

    double cdf(double x) const {
        auto it = std::upper_bound(value.begin(), value.end(), x);
        if (it == value.begin()) return 0.0;
        return cum_prob[it - value.begin() - 1];
    }

    // E[(c - S)^+] = c P(S <= c) - E[S 1(S <= c)]
    double positive_part_mean(double c) const {
        auto it = std::upper_bound(value.begin(), value.end(), c);
        if (it == value.begin()) return 0.0;
        const auto i = static_cast<std::size_t>(it - value.begin()) - 1;
        return c * cum_prob[i] - cum_mass[i];
    }
};

// Convolves a partial-sum pmf with one more demand step. Returns nullopt
// when the merged support would exceed max_atoms.
inline std::optional<SortedPmf> convolve_step(const SortedPmf& base, const DiscreteDemand& d,
                                              std::size_t max_atoms) {
    const std::size_t raw = base.value.size() * d.values.size();
    if (raw > 4 * max_atoms + 16) return std::nullopt;
    std::vector<std::pair<double, double>> acc;
    acc.reserve(raw);
    for (std::size_t j = 0; j < d.values.size(); ++j) {
        for (std::size_t i = 0; i < base.value.size(); ++i) {
            acc.emplace_back(base.value[i] + d.values[j], base.prob[i] * d.probs[j]);
        }
    }
    std::sort(acc.begin(), acc.end());
    SortedPmf out;
    out.value.reserve(acc.size());
    out.prob.reserve(acc.size());
    for (const auto& [v, q] : acc) {
        if (!out.value.empty() && v - out.value.back() <= 1e-12 * std::max(1.0, std::fabs(v))) {
            out.prob.back() += q;
        } else {
            out.value.push_back(v);
            out.prob.push_back(q);
        }
    }
    if (out.value.size() > max_atoms) return std::nullopt;
    out.build_prefixes();
    return out;
}

}  // namespace detail

inline constexpr std::uint64_t kDefaultMcSeed = 0x5bd1e995u;
inline constexpr std::int64_t kDefaultMcPaths = 1000000;
inline constexpr std::size_t kConvolutionAtomCap = 1000000;

// Lazy evaluator for the laws of partial sums S_n = D_1 + ... + D_n of one
// demand distribution. Exponential demand uses the Erlang closed form;
// finite-discrete demand uses exact convolution (levels are cached up to a
// storage budget, then advanced by a rolling buffer); empirical demand, and
// discrete demand whose support outgrows the atom cap, fall back to a
// seeded Monte Carlo panel of path sums.
class PartialSums {
  public:
    explicit PartialSums(Demand d, std::int64_t mc_paths = kDefaultMcPaths,
                         std::uint64_t mc_seed = kDefaultMcSeed)
        : demand_(std::move(d)), mc_paths_(mc_paths), mc_seed_(mc_seed) {
        if (demand_.if_discrete()) {
            levels_.push_back(detail::SortedPmf::point_mass_at_zero());
            stored_atoms_ = 1;
        }
    }

    const Demand& demand() const { return demand_; }
    bool mc_fallback_engaged() const { return mc_engaged_; }

    // P(S_n <= x)
    Estimate cdf(int n, double x) {
        require_n(n);
        if (const auto* e = demand_.if_exponential()) {
            return {erlang_cdf(n, e->rate, x), 0.0, true};
        }
        if (demand_.if_discrete()) {
            if (const auto* pmf = discrete_level(n)) {
                return {pmf->cdf(x), 0.0, true};
            }
        }
        advance_panel(n);
        std::int64_t hits = 0;
        for (double s : panel_) hits += (s <= x);
        const double ph = static_cast<double>(hits) / static_cast<double>(mc_paths_);
        const double se = std::sqrt(std::max(0.0, ph * (1.0 - ph) / static_cast<double>(mc_paths_)));
        return {ph, se, false};
    }

    // E[(c - S_n)^+]
    Estimate positive_part_mean(int n, double c) {
        require_n(n);
        if (c <= 0.0) return {0.0, 0.0, true};
        if (const auto* e = demand_.if_exponential()) {
            const double rate = e->rate;
            const double val = adaptive_simpson(
                [n, rate](double s) { return erlang_cdf(n, rate, s); }, 0.0, c, 1e-10);
            return {val, 0.0, true};
        }
        if (demand_.if_discrete()) {
            if (const auto* pmf = discrete_level(n)) {
                return {pmf->positive_part_mean(c), 0.0, true};
            }
        }
        advance_panel(n);
        double sum = 0.0, sumsq = 0.0;
        for (double s : panel_) {
            const double v = std::max(0.0, c - s);
            sum += v;
            sumsq += v * v;
        }
        const double m = sum / static_cast<double>(mc_paths_);
        const double var = std::max(0.0, sumsq / static_cast<double>(mc_paths_) - m * m);
        return {m, std::sqrt(var / static_cast<double>(mc_paths_)), false};
    }

  private:
    static void require_n(int n) {
        if (n < 1) throw std::invalid_argument("partial sum index n must be >= 1");
    }

    // Returns the exact pmf of S_n, or nullptr once the support cap forces
    // the Monte Carlo fallback.
    const detail::SortedPmf* discrete_level(int n) {
        if (mc_engaged_) return nullptr;
        const auto& dd = *demand_.if_discrete();
        const auto un = static_cast<std::size_t>(n);
        if (un < levels_.size()) return &levels_[un];
        if (!storage_full_) {
            while (levels_.size() <= un) {
                auto next = detail::convolve_step(levels_.back(), dd, kConvolutionAtomCap);
                if (!next) {
                    mc_engaged_ = true;
                    return nullptr;
                }
                stored_atoms_ += next->value.size();
                if (stored_atoms_ > kStorageBudget && levels_.size() > 1) {
                    rolling_ = std::move(*next);
                    rolling_n_ = levels_.size();
                    storage_full_ = true;
                    break;
                }
                levels_.push_back(std::move(*next));
            }
            if (un < levels_.size()) return &levels_[un];
        }
        if (rolling_n_ == 0 || rolling_n_ > un) {
            rolling_ = levels_.back();
            rolling_n_ = levels_.size() - 1;
        }
        while (rolling_n_ < un) {
            auto next = detail::convolve_step(rolling_, dd, kConvolutionAtomCap);
            if (!next) {
                mc_engaged_ = true;
                return nullptr;
            }
            rolling_ = std::move(*next);
            ++rolling_n_;
        }
        return &rolling_;
    }

    // Panel of mc_paths_ running sums, advanced level by level with the
    // substream (mc_seed, level) so any query sequence is reproducible.
    void advance_panel(int n) {
        mc_engaged_ = true;
        const auto un = static_cast<std::size_t>(n);
        if (panel_.empty()) {
            panel_.assign(static_cast<std::size_t>(mc_paths_), 0.0);
            panel_n_ = 0;
        }
        if (panel_n_ > un) {
            std::fill(panel_.begin(), panel_.end(), 0.0);
            panel_n_ = 0;
        }
        while (panel_n_ < un) {
            Rng rng = make_stream(mc_seed_, panel_n_ + 1);
            for (auto& s : panel_) s += demand_.sample_one(rng);
            ++panel_n_;
        }
    }

    static constexpr std::size_t kStorageBudget = 4000000;

    Demand demand_;
    std::int64_t mc_paths_;
    std::uint64_t mc_seed_;

    std::vector<detail::SortedPmf> levels_;  // levels_[n] = pmf of S_n
    std::size_t stored_atoms_ = 0;
    bool storage_full_ = false;
    detail::SortedPmf rolling_;
    std::size_t rolling_n_ = 0;

    bool mc_engaged_ = false;
    std::vector<double> panel_;
    std::size_t panel_n_ = 0;
};

// One-shot P(S_n <= x); heavy users should hold a PartialSums evaluator.
inline Estimate partial_sum_cdf(const Demand& d, int n, double x) {
    PartialSums ps(d);
    return ps.cdf(n, x);
}

}  // namespace lostsales
