#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "decay.hpp"
#include "return_time.hpp"

namespace repairchain {

struct ExitAnalysis {
    double q_exit = 0.0;       // 1 - F(1)
    std::vector<double> pmf;   // P(L = n), n = 0..N
    double u_tail_bound = 0.0; // bound on sum_{n > N} u_n
    JumpModel tilted;          // tilt(model, x0), whose psi drives the weighted criteria
};

/// sum_{n > N} u_n <= U(R0) R0^{-(N+1)} / (1 - 1/R0), with U(R0) = 1/(1 - x0).
inline double green_tail_bound(const DecayParams& d, std::size_t N) {
    const double r = d.R0;
    const double U = 1.0 / (1.0 - *d.x0);
    return U * std::exp(-static_cast<double>(N + 1) * std::log(r)) / (1.0 - 1.0 / r);
}

inline ExitAnalysis exit_pmf(const JumpModel& model, std::size_t N = 2048) {
    if (classify(model) != ChainClass::Transient) throw NotTransient();
    const DecayParams d = decay_params(model);
    const ReturnAnalysis ra = return_pmf(model, N);
    ExitAnalysis out{1.0 - ra.return_prob, {}, green_tail_bound(d, N), tilt(model, *d.x0)};
    out.pmf.resize(N + 1);
    for (std::size_t n = 0; n <= N; ++n) out.pmf[n] = out.q_exit * ra.u[n];
    return out;
}

/// Finiteness of E(R0^L L^k w(L)) with w(n) = n^alpha, 0 < alpha <= 1, or w = 1 when alpha is absent.
///
/// E(R0^L w(L)) and E(R0^tau w(tau); tau < inf) are finite together, so the
/// verdict reduces to the critical tilt at x0.
inline Verdict exit_weighted_verdict(const JumpModel& model, int k, std::optional<double> alpha = std::nullopt) {
    if (classify(model) != ChainClass::Transient) throw NotTransient();
    if (k < 0) throw std::invalid_argument("k must be >= 0");
    if (alpha && !(*alpha > 0.0 && *alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0,1]");
    const double exponent = static_cast<double>(k) + alpha.value_or(0.0);
    std::string quantity = "E(R0^L";
    if (exponent > 0.0) quantity += " L^" + fmt_real(exponent);
    quantity += ")";

    Verdict v;
    v.quantity = quantity;
    if (exponent == 0.0) {
        v.verdict = Finiteness::Finite;
        v.reason = "E(R0^L) = q U(R0) = q/(1 - x0) < inf";
        return v;
    }
    if (exponent >= 1.0) {
        v.verdict = Finiteness::Infinite;
        v.reason = "E(R0^L L) = E(R0^tau tau; tau < inf) = inf";
        return v;
    }
    const DecayParams d = decay_params(model);
    return detail::critical_verdict(quantity, tilt(model, *d.x0), exponent, "critical tilt at x0, ");
}

}  // namespace repairchain
