#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace repairchain {

enum class Family { Explicit, Geometric, HalfStable, PowerZeta };

enum class ChainClass { PositiveRecurrent, NullRecurrent, Transient };

inline std::string_view to_string(Family f) noexcept {
    switch (f) {
        case Family::Explicit: return "explicit";
        case Family::Geometric: return "geometric";
        case Family::HalfStable: return "half_stable";
        case Family::PowerZeta: return "power_zeta";
    }
    return "unknown";
}

inline std::string_view to_string(ChainClass c) noexcept {
    switch (c) {
        case ChainClass::PositiveRecurrent: return "positive_recurrent";
        case ChainClass::NullRecurrent: return "null_recurrent";
        case ChainClass::Transient: return "transient";
    }
    return "unknown";
}

/// Plain description of a jump law, as read from a model-spec document.
struct ModelSpec {
    Family family = Family::Explicit;
    double p = 0.0;              // Geometric
    double alpha = 0.0;          // PowerZeta
    std::vector<double> a;       // Explicit
    double tilt = 1.0;           // exponential tilt applied to HalfStable / PowerZeta
};

/// Tolerances shared by the model layer.
inline constexpr double kCriticalTolerance = 1e-12;   // |mu - 1| below this is critical
inline constexpr double kSumTolerance = 1e-12;        // |sum a_n - 1| for explicit laws
inline constexpr double kCacheTailMass = 1e-12;       // target tail mass of the coefficient cache
inline constexpr std::size_t kMaxCache = std::size_t{1} << 21;

/// Jump distribution {a_n} of the repair-shop chain, p_ij = a_{j-(i-1)^+}.
///
/// Immutable once built. Series families keep a shared coefficient cache
/// a_0..a_{N_max}; copies share it.
///
/// HalfStable and PowerZeta models may carry an exponential tilt `s` in (0,1]:
/// their coefficients are then a_n s^n / G(s). Geometric and Explicit laws are
/// tilted in closed form instead, so their tilt is always 1.
class JumpModel {
public:
    static JumpModel geometric(double p) {
        if (!(p > 0.0 && p < 1.0)) throw InvalidSpec("geometric p must lie in (0,1)");
        // a_0 + a_1 = p(2 - p) < 1 holds for every p in (0,1)
        JumpModel m(Family::Geometric);
        m.param_ = p;
        m.finish();
        return m;
    }

    static JumpModel explicit_jumps(std::vector<double> a) {
        if (a.empty()) throw InvalidSpec("explicit list is empty");
        numeric::CompensatedSum sum;
        for (double v : a) {
            if (!std::isfinite(v) || v < 0.0) throw InvalidSpec("explicit probabilities must be finite and >= 0");
            sum += v;
        }
        while (a.size() > 1 && a.back() == 0.0) a.pop_back();
        if (!(a[0] > 0.0)) throw InvalidSpec("a_0 must be positive");
        const double a1 = a.size() > 1 ? a[1] : 0.0;
        if (!(a[0] + a1 < 1.0)) throw InvalidSpec("a_0 + a_1 must be below 1");
        if (std::fabs(sum.value() - 1.0) > kSumTolerance) throw InvalidSpec("probabilities must sum to 1");
        for (double& v : a) v /= sum.value();
        JumpModel m(Family::Explicit);
        m.explicit_ = std::make_shared<const std::vector<double>>(std::move(a));
        m.finish();
        return m;
    }

    static JumpModel half_stable() {
        JumpModel m(Family::HalfStable);
        m.finish();
        return m;
    }

    static JumpModel power_zeta(double alpha) {
        if (!(alpha > 2.0) || !std::isfinite(alpha)) throw InvalidSpec("power_zeta alpha must exceed 2");
        JumpModel m(Family::PowerZeta);
        m.param_ = alpha;
        m.finish();
        return m;
    }

    /// Series family tilted by s in (0,1]; used by `tilt` and by specs carrying "tilt".
    static JumpModel tilted_series(JumpModel base, double s) {
        if (!base.is_series() || base.scale_ != 1.0) throw InvalidSpec("tilted_series needs an untilted series family");
        if (!(s > 0.0 && s <= 1.0)) throw InvalidSpec("series tilt must lie in (0,1]");
        if (s == 1.0) return base;
        base.scale_ = s;
        base.norm_ = base.base_derivative(s, 0);
        base.finish();
        return base;
    }

    [[nodiscard]] Family family() const noexcept { return family_; }
    [[nodiscard]] double parameter() const noexcept { return param_; }
    [[nodiscard]] double tilt_scale() const noexcept { return scale_; }
    [[nodiscard]] bool is_series() const noexcept {
        return family_ == Family::HalfStable || family_ == Family::PowerZeta;
    }

    [[nodiscard]] ModelSpec spec() const {
        ModelSpec s;
        s.family = family_;
        if (family_ == Family::Geometric) s.p = param_;
        if (family_ == Family::PowerZeta) s.alpha = param_;
        if (family_ == Family::Explicit) s.a = *explicit_;
        s.tilt = scale_;
        return s;
    }

    /// Cached a_0..a_{N_max}.
    [[nodiscard]] std::span<const double> coefficients() const noexcept { return *cache_; }
    /// Certified bound on sum_{n > N_max} a_n.
    [[nodiscard]] double cached_tail_mass() const noexcept { return cache_tail_; }

    /// a_n for any n; values beyond the cache are computed on demand.
    [[nodiscard]] double coefficient(std::size_t n) const {
        if (n < cache_->size()) return (*cache_)[n];
        switch (family_) {
            case Family::Explicit: return 0.0;
            case Family::Geometric: return param_ * std::pow(1.0 - param_, static_cast<double>(n));
            case Family::PowerZeta:
                return power_zeta_base(n) * std::pow(scale_, static_cast<double>(n)) / norm_;
            case Family::HalfStable: {
                // continue the ratio recurrence from the end of the cache
                std::size_t m = cache_->size() - 1;
                double a = cache_->back() * std::pow(scale_, -static_cast<double>(m)) * norm_;
                for (; m < n; ++m) a *= (2.0 * m - 3.0) / (2.0 * m + 2.0);
                return a * std::pow(scale_, static_cast<double>(n)) / norm_;
            }
        }
        return 0.0;
    }

    /// Mean jump mu = G'(1).
    [[nodiscard]] double mean() const noexcept { return mu_; }

    /// 1 - mu, formed without the cancellation of subtracting the rounded mean.
    [[nodiscard]] double mean_gap() const noexcept { return gap_; }

    /// R = sup{t : G(t) < inf}.
    [[nodiscard]] double radius() const noexcept {
        switch (family_) {
            case Family::Explicit: return numeric::kInf;
            case Family::Geometric: return 1.0 / (1.0 - param_);
            default: return 1.0 / scale_;
        }
    }

    /// True when the family is known to be critical (mu = 1) without rounding.
    [[nodiscard]] bool exactly_critical() const noexcept {
        return (family_ == Family::Geometric && param_ == 0.5) || (family_ == Family::HalfStable && scale_ == 1.0);
    }

    /// sup{beta : sum n^beta a_n < inf}; the sum diverges at the index itself.
    [[nodiscard]] double tail_index() const noexcept {
        if (scale_ < 1.0) return numeric::kInf;
        switch (family_) {
            case Family::HalfStable: return 1.5;
            case Family::PowerZeta: return param_;
            default: return numeric::kInf;
        }
    }

    /// beta with 1 - G'(x) ~ (1-x)^beta as x -> 1, when it is known in closed form.
    [[nodiscard]] std::optional<double> derivative_tail_exponent() const noexcept {
        if (family_ == Family::HalfStable && scale_ == 1.0) return 0.5;
        return std::nullopt;
    }

    /// G^{(k)}(t); +inf outside the convergence region or where the derivative series diverges.
    [[nodiscard]] double derivative(double t, int k = 0) const {
        if (t < 0.0 || k < 0 || std::isnan(t)) return std::nan("");
        if (t == 1.0 && k == 0) return 1.0;
        switch (family_) {
            case Family::Geometric: {
                const double q = 1.0 - param_;
                const double denom = 1.0 - q * t;
                if (!(denom > 0.0)) return numeric::kInf;
                double r = param_;
                for (int i = 1; i <= k; ++i) r *= i * q;
                return r / std::pow(denom, k + 1);
            }
            case Family::Explicit: {
                const auto& a = *explicit_;
                numeric::CompensatedSum acc;
                double power = 1.0;
                for (std::size_t n = static_cast<std::size_t>(k); n < a.size(); ++n) {
                    acc += numeric::falling_factorial(static_cast<double>(n), k) * a[n] * power;
                    power *= t;
                }
                return acc.value();
            }
            default: {
                double y = scale_ * t;
                if (std::fabs(y - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon()) y = 1.0;
                const double base = base_derivative(y, k);
                return std::pow(scale_, k) * base / norm_;
            }
        }
    }

    /// psi(h) = G(1-h) - (1-h), evaluated in a cancellation-aware form where one exists.
    [[nodiscard]] double psi(double h) const {
        if (h <= 0.0) return 0.0;
        if (h >= 1.0) return coefficient(0);
        switch (family_) {
            case Family::Geometric: {
                const double p = param_, q = 1.0 - param_;
                return h * ((p - q) + q * h) / (p + q * h);
            }
            case Family::HalfStable:
                if (scale_ == 1.0) return (2.0 / 3.0) * std::pow(h, 1.5);
                break;
            case Family::Explicit: {
                // sum a_n [(1-h)^n - 1 + n h] + (1 - mu) h
                const auto& a = *explicit_;
                const double lg = std::log1p(-h);
                numeric::CompensatedSum acc;
                for (std::size_t n = 2; n < a.size(); ++n) {
                    const double dn = static_cast<double>(n);
                    acc += a[n] * (std::expm1(dn * lg) + dn * h);
                }
                acc += (1.0 - mu_) * h;
                return acc.value();
            }
            default: break;
        }
        return derivative(1.0 - h, 0) - (1.0 - h);
    }

    /// phi(h) = 1 - G'(1-h).
    [[nodiscard]] double phi(double h) const { return 1.0 - derivative(1.0 - h, 1); }

private:
    explicit JumpModel(Family f) : family_(f) {}

    void finish() {
        build_cache();
        if (family_ == Family::Geometric) {
            mu_ = (1.0 - param_) / param_;
            gap_ = (2.0 * param_ - 1.0) / param_;
        } else if (family_ == Family::Explicit) {
            numeric::CompensatedSum acc, gap;
            for (std::size_t n = 0; n < explicit_->size(); ++n) {
                acc += static_cast<double>(n) * (*explicit_)[n];
                gap += (1.0 - static_cast<double>(n)) * (*explicit_)[n];
            }
            mu_ = acc.value();
            gap_ = gap.value();
        } else {
            mu_ = derivative(1.0, 1);
            gap_ = 1.0 - mu_;
        }
    }

    /// Untilted PowerZeta coefficient, written to avoid cancellation for large n.
    [[nodiscard]] double power_zeta_base(std::size_t n) const {
        const double m = static_cast<double>(n) + 1.0;
        return std::exp(-param_ * std::log(m)) * -std::expm1(-param_ * std::log1p(1.0 / m));
    }

    /// Untilted-family tail mass sum_{n > N} a_n (exact closed forms).
    [[nodiscard]] double base_tail(std::size_t N, double half_binom) const {
        switch (family_) {
            case Family::PowerZeta: return std::pow(static_cast<double>(N) + 2.0, -param_);
            case Family::HalfStable: return (2.0 / 3.0) * half_binom;
            case Family::Geometric: return std::pow(1.0 - param_, static_cast<double>(N) + 1.0);
            default: return 0.0;
        }
    }

    void build_cache() {
        auto cache = std::make_shared<std::vector<double>>();
        if (family_ == Family::Explicit) {
            *cache = *explicit_;
            cache_tail_ = 0.0;
            cache_ = std::move(cache);
            return;
        }
        // |binom(1/2, n)| for the HalfStable tail identity
        double half_binom = 0.5;
        double base_a = 0.0;
        double spow = 1.0;
        for (std::size_t n = 0;; ++n) {
            switch (family_) {
                case Family::Geometric: base_a = param_ * std::pow(1.0 - param_, static_cast<double>(n)); break;
                case Family::PowerZeta: base_a = power_zeta_base(n); break;
                case Family::HalfStable:
                    if (n == 0) base_a = 2.0 / 3.0;
                    else if (n == 1) base_a = 0.0;
                    else if (n == 2) base_a = 0.25;
                    else base_a *= (2.0 * n - 5.0) / (2.0 * n);
                    if (n >= 2) half_binom *= (n - 1.5) / n;
                    break;
                default: break;
            }
            cache->push_back(base_a * spow / norm_);
            const double tail = base_tail(n, half_binom) * spow * scale_ / norm_;
            spow *= scale_;
            if ((n >= 2 && tail < kCacheTailMass) || cache->size() >= kMaxCache) {
                cache_tail_ = tail;
                break;
            }
        }
        cache_ = std::move(cache);
    }

    /// G^{(k)}(y) of the untilted series family.
    [[nodiscard]] double base_derivative(double y, int k) const {
        if (y > 1.0) return numeric::kInf;
        if (family_ == Family::HalfStable) {
            const double r = 1.0 - y;
            if (k == 0) return y + (2.0 / 3.0) * r * std::sqrt(r);
            if (k == 1) return 1.0 - std::sqrt(r);
            if (y == 1.0) return numeric::kInf;
            double c = 2.0 / 3.0;
            for (int i = 0; i < k; ++i) c *= std::fabs(1.5 - i);
            return c * std::pow(r, 1.5 - k);
        }
        // PowerZeta
        const double alpha = param_;
        if (y == 1.0) {
            if (k == 0) return 1.0;
            if (static_cast<double>(k) >= alpha) return numeric::kInf;
            // k * sum_{m >= 2} (m-2)(m-3)...(m-k) m^{-alpha}, expanded in powers of m
            std::vector<double> poly{1.0};
            for (int i = 0; i < k - 1; ++i) {
                std::vector<double> next(poly.size() + 1, 0.0);
                for (std::size_t j = 0; j < poly.size(); ++j) {
                    next[j + 1] += poly[j];
                    next[j] -= (2.0 + i) * poly[j];
                }
                poly = std::move(next);
            }
            numeric::CompensatedSum acc;
            for (std::size_t j = 0; j < poly.size(); ++j)
                acc += poly[j] * numeric::zeta_tail(alpha - static_cast<double>(j), 2.0);
            return k * acc.value();
        }
        return power_zeta_series(y, k);
    }

    /// Direct summation of sum_n n^(k) a_n y^{n-k} for y < 1 with a certified stopping rule.
    [[nodiscard]] double power_zeta_series(double y, int k) const {
        const double alpha = param_;
        const std::size_t start = static_cast<std::size_t>(k);
        if (y == 0.0) return numeric::falling_factorial(static_cast<double>(k), k) * power_zeta_base(start);
        constexpr std::size_t kMaxTerms = std::size_t{1} << 26;
        const double dk = static_cast<double>(k);
        const double growth = std::max(0.0, dk - alpha - 1.0);
        numeric::CompensatedSum acc;
        double power = 1.0;
        for (std::size_t n = start; n < kMaxTerms; ++n) {
            const double dn = static_cast<double>(n);
            acc += numeric::falling_factorial(dn, k) * power_zeta_base(n) * power;
            power *= y;
            if ((n - start) % 64 != 63) continue;
            // tail bound for indices > n: term <= alpha (m+1)^{k-alpha-1} y^{m-k}
            double bound = numeric::kInf;
            const double lead = alpha * power;  // y^{n+1-k}
            if (dk < alpha) bound = lead * std::pow(dn + 1.0, dk - alpha) / (alpha - dk);
            const double rho = y * std::pow(1.0 + 1.0 / (dn + 2.0), growth);
            if (rho < 1.0)
                bound = std::min(bound, lead * std::pow(dn + 2.0, dk - alpha - 1.0) / (1.0 - rho));
            if (bound <= 1e-17 * acc.value()) break;
        }
        return acc.value();
    }

    Family family_;
    double param_ = 0.0;
    double scale_ = 1.0;
    double norm_ = 1.0;
    double mu_ = 0.0;
    double gap_ = 1.0;
    double cache_tail_ = 0.0;
    std::shared_ptr<const std::vector<double>> explicit_;
    std::shared_ptr<const std::vector<double>> cache_;
};

/// Validates a spec record and builds the model.
inline JumpModel build_model(const ModelSpec& spec) {
    switch (spec.family) {
        case Family::Geometric:
            if (spec.tilt != 1.0) throw InvalidSpec("geometric specs carry their tilt in p");
            return JumpModel::geometric(spec.p);
        case Family::Explicit:
            if (spec.tilt != 1.0) throw InvalidSpec("explicit specs carry their tilt in a");
            return JumpModel::explicit_jumps(spec.a);
        case Family::HalfStable: return JumpModel::tilted_series(JumpModel::half_stable(), spec.tilt);
        case Family::PowerZeta: return JumpModel::tilted_series(JumpModel::power_zeta(spec.alpha), spec.tilt);
    }
    throw InvalidSpec("unknown family");
}

/// G^{(k)}(t).
inline double eval_G(const JumpModel& model, double t, int order = 0) { return model.derivative(t, order); }

inline ChainClass classify(const JumpModel& model) {
    if (model.exactly_critical()) return ChainClass::NullRecurrent;
    const double mu = model.mean();
    if (mu < 1.0 - kCriticalTolerance) return ChainClass::PositiveRecurrent;
    if (mu > 1.0 + kCriticalTolerance) return ChainClass::Transient;
    return ChainClass::NullRecurrent;
}

}  // namespace repairchain
