#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "decay.hpp"
#include "model.hpp"
#include "series_tools.hpp"

namespace repairchain {

/// Exact first-return and Green sequences up to index N.
struct ReturnAnalysis {
    std::vector<double> f;   // f[n] = P(tau = n); f[0] = 0
    std::vector<double> u;   // u[n] = P(X_n = 0 | X_0 = 0); u[0] = 1
    double return_prob = 1.0;  // F(1) = P(tau < inf)
    [[nodiscard]] std::size_t size() const noexcept { return f.empty() ? 0 : f.size() - 1; }
};

/// Minimal nonnegative root of x = t G(x), i.e. F(t) = E(t^tau; tau < inf).
///
/// Iterates from x = 0 with Newton steps on h(x) = t G(x) - x. h is convex and
/// positive below the minimal root, so every iterate stays a lower bound and
/// each step is at least as long as the plain fixed-point step x -> t G(x).
inline double eval_F(const JumpModel& model, double t) {
    if (std::isnan(t) || t < 0.0) throw std::invalid_argument("eval_F needs t >= 0");
    if (t == 0.0) return 0.0;
    const ChainClass cls = classify(model);
    if (t == 1.0 && cls != ChainClass::Transient) return 1.0;
    if (t > 1.0) {
        const DecayParams d = decay_params(model);
        // F has a square-root branch point at R1; a t that is R1 up to rounding gets the exact value
        if (std::fabs(t - d.R1) <= 8.0 * std::numeric_limits<double>::epsilon() * d.R1) return d.F_at_R1;
        if (t > d.R1) return numeric::kInf;
    }
    constexpr long kMaxIterations = 1'000'000;
    constexpr double kStepTolerance = 1e-14;
    double x = 0.0;
    for (long it = 0; it < kMaxIterations; ++it) {
        const double gx = model.derivative(x, 0);
        if (!std::isfinite(gx)) return numeric::kInf;
        const double h = t * gx - x;
        if (h <= 0.0) return x;
        const double slope = 1.0 - t * model.derivative(x, 1);
        // convex h with h > 0 and h' >= 0 never returns to zero
        if (!(slope > 0.0)) return numeric::kInf;
        const double step = h / slope;
        x += step;
        if (step < kStepTolerance || step <= 1e-16 * x) return x;
    }
    throw NoConvergence("F(t) fixed point near the radius R1");
}

/// f_n = (1/n) [x^{n-1}] G(x)^n for n <= N, followed by the renewal recursion for u_n.
///
/// G is split as a_0 + (1 - a_0) x H(x) with H summing to one, so
/// [x^{n-1}] G^n = sum_k C(n,k) a_0^{n-k} (1-a_0)^k [x^{n-1-k}] H^k.
/// Every term is nonnegative; the binomial weights are evaluated in log space.
inline ReturnAnalysis return_pmf(const JumpModel& model, std::size_t N) {
    if (N < 1) throw std::invalid_argument("return_pmf needs N >= 1");
    const double a0 = model.coefficient(0);
    const double rest = 1.0 - a0;

    // normalized H, coefficients 0..N-1
    std::vector<double> h(N, 0.0);
    std::size_t h_len = 0;
    for (std::size_t i = 0; i < N; ++i) {
        h[i] = model.coefficient(i + 1) / rest;
        if (h[i] != 0.0) h_len = i + 1;
    }

    std::vector<long double> log_fact(N + 1, 0.0L);
    for (std::size_t n = 1; n <= N; ++n) log_fact[n] = std::lgamma(static_cast<long double>(n) + 1.0L);
    const long double log_a0 = std::log(static_cast<long double>(a0));
    const long double log_rest = std::log(static_cast<long double>(rest));

    std::vector<numeric::CompensatedSum> acc(N + 1);
    std::vector<double> power{1.0};  // H^k truncated to degree N-1-k
    std::vector<double> next;
    for (std::size_t k = 0; k < N; ++k) {
        for (std::size_t m = 0; m < power.size(); ++m) {
            const double coeff = power[m];
            if (coeff == 0.0) continue;
            const std::size_t n = m + k + 1;
            const long double log_weight = log_fact[n] - log_fact[k] - log_fact[n - k] +
                                           static_cast<long double>(n - k) * log_a0 +
                                           static_cast<long double>(k) * log_rest;
            acc[n] += static_cast<double>(std::exp(log_weight)) * coeff / static_cast<double>(n);
        }
        if (k + 1 == N) break;
        // H^{k+1} up to degree N-2-k
        const std::size_t len = N - 1 - k;
        next.assign(len, 0.0);
        const std::size_t src_len = std::min(power.size(), len);
        for (std::size_t i = 0; i < std::min(h_len, len); ++i) {
            const double hi = h[i];
            if (hi == 0.0) continue;
            const std::size_t count = std::min(src_len, len - i);
            double* dst = next.data() + i;
            const double* src = power.data();
            for (std::size_t m = 0; m < count; ++m) dst[m] += hi * src[m];
        }
        power.swap(next);
    }

    ReturnAnalysis out;
    out.f.assign(N + 1, 0.0);
    for (std::size_t n = 1; n <= N; ++n) out.f[n] = acc[n].value();
    out.u.assign(N + 1, 0.0);
    out.u[0] = 1.0;
    for (std::size_t n = 1; n <= N; ++n) {
        numeric::CompensatedSum s;
        for (std::size_t k = 1; k <= n; ++k) s += out.f[k] * out.u[n - k];
        out.u[n] = s.value();
    }
    out.return_prob = eval_F(model, 1.0);
    return out;
}

/// psi(h) = G(1-h) - (1-h) on [0,1].
inline double psi(const JumpModel& model, double h) { return model.psi(h); }

/// Inverse of psi, extended by 1 for y >= a_0.
inline double psi_inv(const JumpModel& model, double y) {
    if (!(y > 0.0)) return 0.0;
    if (y >= model.coefficient(0)) return 1.0;
    return numeric::bisect([&](double h) { return model.psi(h) - y; }, 0.0, 1.0, 1e-13);
}

struct AsymptoticExponent {
    double gamma = 0.5;
    std::string method;
};

enum class ExponentMethod { Auto, Fitted };

/// gamma with 1 - F(t) ~ (1-t)^gamma, when it follows from G in closed form.
inline std::optional<AsymptoticExponent> analytic_exponent(const JumpModel& model) {
    if (std::isfinite(model.derivative(1.0, 2))) return AsymptoticExponent{0.5, "finite_second_derivative"};
    if (const auto beta = model.derivative_tail_exponent())
        return AsymptoticExponent{1.0 / (1.0 + *beta), "derivative_tail_exponent"};
    return std::nullopt;
}

/// Least-squares slope of log psi^{-1}(s) against log s on 50 geometric points in [1e-6, 1e-2].
inline double fitted_exponent(const JumpModel& model) {
    constexpr int kPoints = 50;
    const double lo = std::log(1e-6), hi = std::log(1e-2);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < kPoints; ++i) {
        const double x = lo + (hi - lo) * i / (kPoints - 1);
        const double y = std::log(psi_inv(model, std::exp(x)));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (kPoints * sxy - sx * sy) / (kPoints * sxx - sx * sx);
}

inline AsymptoticExponent asymptotic_exponent(const JumpModel& model, ExponentMethod method = ExponentMethod::Auto) {
    if (classify(model) != ChainClass::NullRecurrent) throw NotNullRecurrent();
    if (method == ExponentMethod::Auto) {
        if (auto a = analytic_exponent(model)) return *a;
    }
    return {fitted_exponent(model), "fitted"};
}

struct MomentEstimate {
    double value = 0.0;
    double tail_bound = 0.0;        // certified bound on the omitted tail of the numeric sum
    bool lower_bound_only = false;  // tail could not be certified (R1 = 1)
    std::string method;
};

/// sum_{n > N} n^k r^{-n} for r > 1.
inline double power_geometric_tail(int k, double r, std::size_t N) {
    const double lr = std::log(r);
    numeric::CompensatedSum acc;
    double prev = numeric::kInf;
    for (std::size_t n = N + 1;; ++n) {
        const double dn = static_cast<double>(n);
        const double term = std::exp(k * std::log(dn) - dn * lr);
        acc += term;
        const double ratio = std::pow(1.0 + 1.0 / dn, k) / r;
        if (term < prev && ratio < 1.0) {
            const double rest = term * ratio / (1.0 - ratio);
            if (rest <= 1e-17 * acc.value() || rest < 1e-300) break;
        }
        prev = term;
    }
    return acc.value();
}

/// sum_{n<=N} n^k f_n plus the certified tail F(R1) * sum_{n>N} n^k R1^{-n} when R1 > 1.
inline MomentEstimate tau_moment_numeric(const JumpModel& model, int k, std::size_t N) {
    if (k < 1) throw std::invalid_argument("moment order must be >= 1");
    const ReturnAnalysis ra = return_pmf(model, N);
    numeric::CompensatedSum acc;
    for (std::size_t n = 1; n <= N; ++n) acc += std::pow(static_cast<double>(n), k) * ra.f[n];
    MomentEstimate m;
    m.value = acc.value();
    m.method = "numeric";
    const DecayParams d = decay_params(model);
    if (d.R1 > 1.0) {
        m.tail_bound = d.F_at_R1 * power_geometric_tail(k, d.R1, N);
    } else {
        m.tail_bound = numeric::kInf;
        m.lower_bound_only = true;
    }
    return m;
}

/// E(tau^k) for a positive-recurrent chain.
inline MomentEstimate tau_moment(const JumpModel& model, int k, std::size_t N = 1024) {
    if (classify(model) != ChainClass::PositiveRecurrent) throw NotPositiveRecurrent();
    if (k < 1) throw std::invalid_argument("moment order must be >= 1");
    if (k == 1) return {1.0 / model.mean_gap(), 0.0, false, "closed_form"};
    if (!std::isfinite(model.derivative(1.0, k))) return {numeric::kInf, 0.0, false, "diverges"};
    return tau_moment_numeric(model, k, N);
}

enum class Finiteness { Finite, Infinite, Unknown };

inline std::string_view to_string(Finiteness v) noexcept {
    switch (v) {
        case Finiteness::Finite: return "finite";
        case Finiteness::Infinite: return "infinite";
        case Finiteness::Unknown: return "unknown";
    }
    return "unknown";
}

struct Verdict {
    std::string quantity;
    Finiteness verdict = Finiteness::Unknown;
    std::string reason;
    std::vector<PartialSum> partial_sums;  // criterion diagnostics, Unknown verdicts only
    std::optional<double> block_ratio;
};

inline std::string fmt_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

namespace detail {

inline Verdict threshold_verdict(std::string quantity, double exponent, double threshold, std::string why) {
    Verdict v;
    v.quantity = std::move(quantity);
    v.verdict = exponent < threshold ? Finiteness::Finite : Finiteness::Infinite;
    v.reason = std::move(why) + ": finite iff exponent < " + fmt_real(threshold);
    return v;
}

/// Unknown verdict with partial sums of sum -n Delta^2 w(n+1) psi^{-1}(1/n).
inline Verdict criterion_diagnostics(std::string quantity, const JumpModel& critical, double exponent,
                                     std::string why) {
    Verdict v;
    v.quantity = std::move(quantity);
    v.verdict = Finiteness::Unknown;
    const auto series = criterion_terms(WeightFunction::power(exponent),
                                        [&](double x) { return psi_inv(critical, x); }, 100'000);
    v.partial_sums = series.partial_sums;
    v.block_ratio = series.block_ratio;
    v.reason = std::move(why) + "; criterion series " + block_ratio_label(series.block_ratio);
    return v;
}

/// Verdict for E(w(tau)) with w(n) = n^exponent, 0 < exponent < 1, on a critical law.
inline Verdict critical_verdict(std::string quantity, const JumpModel& critical, double exponent,
                                const std::string& context) {
    if (const auto a = analytic_exponent(critical))
        return threshold_verdict(std::move(quantity), exponent, a->gamma,
                                 context + (a->method == "finite_second_derivative"
                                                ? "G''(1) < inf on the critical law"
                                                : "1 - G'(x) ~ (1-x)^beta on the critical law"));
    if (exponent < 0.5) {
        Verdict v;
        v.quantity = std::move(quantity);
        v.verdict = Finiteness::Finite;
        v.reason = context + "G''(1) = inf on the critical law implies finiteness below 1/2";
        return v;
    }
    return criterion_diagnostics(std::move(quantity), critical, exponent, context + "no analytic threshold");
}

}  // namespace detail

/// Finiteness of E(tau^alpha).
inline Verdict tau_alpha_finite(const JumpModel& model, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    const std::string quantity = "E(tau^" + fmt_real(alpha) + ")";
    Verdict v;
    v.quantity = quantity;
    switch (classify(model)) {
        case ChainClass::Transient:
            v.verdict = Finiteness::Infinite;
            v.reason = "transient chain: P(tau = inf) > 0";
            return v;
        case ChainClass::NullRecurrent:
            if (alpha >= 1.0) {
                v.verdict = Finiteness::Infinite;
                v.reason = "null recurrent: E(tau) = inf";
                return v;
            }
            return detail::critical_verdict(quantity, model, alpha, "null recurrent, ");
        case ChainClass::PositiveRecurrent: break;
    }
    if (alpha <= 1.0) {
        v.verdict = Finiteness::Finite;
        v.reason = "positive recurrent: E(tau) = 1/(1-mu) < inf";
        return v;
    }
    const double index = model.tail_index();
    v.verdict = alpha < index ? Finiteness::Finite : Finiteness::Infinite;
    v.reason = std::isinf(index) ? "positive recurrent, all jump moments finite"
                                 : "positive recurrent: finite iff sum n^alpha a_n < inf iff alpha < " +
                                       fmt_real(index);
    return v;
}

/// Finiteness of E(R1^tau tau^alpha; tau < inf), alpha >= 0.
inline Verdict tilted_tau_finite(const JumpModel& model, double alpha) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");
    const DecayParams d = decay_params(model);
    const std::string quantity = "E(R1^tau tau^" + fmt_real(alpha) + "; tau<inf)";
    Verdict v;
    v.quantity = quantity;
    if (alpha == 0.0) {
        v.verdict = Finiteness::Finite;
        v.reason = "F(R1) = " + fmt_real(d.F_at_R1) + " < inf";
        return v;
    }
    switch (d.case_label) {
        case DecayCase::NullRecurrent:
        case DecayCase::CriticalRadiusOne: {
            Verdict inner = tau_alpha_finite(model, alpha);
            inner.quantity = quantity;
            inner.reason = "R1 = 1; " + inner.reason;
            return inner;
        }
        case DecayCase::TransientTilt:
        case DecayCase::InteriorCritical:
            if (alpha >= 1.0) {
                v.verdict = Finiteness::Infinite;
                v.reason = "critical tilt at x0: E(R1^tau tau) = inf";
                return v;
            }
            return detail::critical_verdict(quantity, tilt(model, *d.x0), alpha, "critical tilt at x0, ");
        case DecayCase::BoundaryCase: {
            if (alpha <= 1.0) {
                v.verdict = Finiteness::Finite;
                v.reason = "tilt at R stays positive recurrent: E(R1^tau tau) < inf";
                return v;
            }
            const double index = tilt(model, model.radius()).tail_index();
            v.verdict = alpha < index ? Finiteness::Finite : Finiteness::Infinite;
            v.reason = "finite iff sum R^n n^alpha a_n < inf iff alpha < " + fmt_real(index);
            return v;
        }
    }
    return v;
}

}  // namespace repairchain
