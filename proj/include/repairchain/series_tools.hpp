#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "numeric.hpp"

namespace repairchain {

/// Weight sequence in the class W: nonnegative, increasing, with decreasing
/// increments that vanish at infinity. Two families are provided:
/// w(n) = n^alpha (0 < alpha <= 1) and w(n) = log(1 + n).
class WeightFunction {
public:
    enum class Kind { Power, Log };

    static WeightFunction power(double alpha) {
        if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("power weight needs 0 < alpha <= 1");
        return WeightFunction(Kind::Power, alpha);
    }
    static WeightFunction log() { return WeightFunction(Kind::Log, 0.0); }

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] double alpha() const noexcept { return alpha_; }

    [[nodiscard]] double value(double n) const {
        if (n <= 0.0) return 0.0;
        return kind_ == Kind::Power ? std::pow(n, alpha_) : std::log1p(n);
    }

    /// w(n) - w(n-1), n >= 1.
    [[nodiscard]] double delta(std::size_t n) const {
        if (n == 0) return 0.0;
        const double dn = static_cast<double>(n);
        if (kind_ == Kind::Log) return std::log1p(1.0 / dn);
        if (alpha_ == 1.0) return 1.0;
        if (n == 1) return 1.0;
        return -std::pow(dn, alpha_) * std::expm1(alpha_ * std::log1p(-1.0 / dn));
    }

    /// Delta w(n) - Delta w(n-1), n >= 2; never positive on W.
    [[nodiscard]] double delta2(std::size_t n) const {
        if (n < 2) return 0.0;
        if (kind_ == Kind::Power && alpha_ == 1.0) return 0.0;
        return delta(n) - delta(n - 1);
    }

private:
    WeightFunction(Kind k, double a) : kind_(k), alpha_(a) {}
    Kind kind_;
    double alpha_;
};

struct PartialSum {
    std::size_t n;
    double value;
};

/// Terms -n * Delta^2 w(n+1) * g(1/n) of a weighted-moment criterion series.
struct CriterionSeries {
    std::vector<double> terms;              // terms[n-1] is the n-th term
    std::vector<PartialSum> partial_sums;   // at powers of ten and at N
    std::optional<double> block_ratio;      // decade-block ratio, see block_ratio()
};

/// Ratio of consecutive decade block sums (S(100N) - S(10N)) / (S(10N) - S(N)).
/// Below 0.9 the series "appears summable"; this is a diagnostic, never a verdict.
inline std::optional<double> block_ratio(std::span<const PartialSum> sums) {
    for (std::size_t i = sums.size(); i-- > 2;) {
        const auto& c3 = sums[i];
        const auto& c2 = sums[i - 1];
        const auto& c1 = sums[i - 2];
        if (c2.n == 10 * c1.n && c3.n == 10 * c2.n) {
            const double lower = c2.value - c1.value;
            if (!(lower > 0.0)) return std::nullopt;
            return (c3.value - c2.value) / lower;
        }
    }
    return std::nullopt;
}

inline constexpr double kSummableBlockRatio = 0.9;

inline std::string block_ratio_label(std::optional<double> ratio) {
    if (!ratio) return "no decade blocks available";
    return *ratio < kSummableBlockRatio ? "appears summable" : "appears divergent";
}

template <class G>
CriterionSeries criterion_terms(const WeightFunction& w, G&& g, std::size_t N) {
    if (N < 2) throw std::invalid_argument("criterion series needs N >= 2");
    CriterionSeries out;
    out.terms.reserve(N);
    numeric::CompensatedSum acc;
    std::size_t next_checkpoint = 1;
    for (std::size_t n = 1; n <= N; ++n) {
        const double dn = static_cast<double>(n);
        const double d2 = w.delta2(n + 1);
        const double term = d2 == 0.0 ? 0.0 : -dn * d2 * g(1.0 / dn);
        out.terms.push_back(term);
        acc += term;
        if (n == next_checkpoint || n == N) {
            out.partial_sums.push_back({n, acc.value()});
            if (n == next_checkpoint) next_checkpoint *= 10;
        }
    }
    out.block_ratio = block_ratio(out.partial_sums);
    return out;
}

/// A_n / A(1 - 1/n) for a nonnegative decreasing sequence given as a callable k -> a_k.
template <class Seq>
    requires std::invocable<Seq&, std::size_t>
double partial_sum_ratio(Seq&& a, std::size_t n) {
    if (n < 1) throw std::invalid_argument("partial_sum_ratio needs n >= 1");
    numeric::CompensatedSum partial;
    for (std::size_t k = 0; k <= n; ++k) partial += a(k);

    const double r = 1.0 - 1.0 / static_cast<double>(n);
    numeric::CompensatedSum gf;
    double power = 1.0;
    constexpr std::size_t kMaxTerms = std::size_t{1} << 30;
    for (std::size_t k = 0; k < kMaxTerms; ++k) {
        const double ak = a(k);
        gf += ak * power;
        power *= r;
        // decreasing a: the remaining tail is at most a_k r^{k+1} / (1 - r)
        if (k > n && ak * power * static_cast<double>(n) <= 1e-17 * gf.value()) break;
        if (power == 0.0 || (ak == 0.0 && k > n)) break;
    }
    return partial.value() / gf.value();
}

/// Finite list overload; entries past the end are zero.
inline double partial_sum_ratio(std::span<const double> a, std::size_t n) {
    return partial_sum_ratio([a](std::size_t k) { return k < a.size() ? a[k] : 0.0; }, n);
}

}  // namespace repairchain
