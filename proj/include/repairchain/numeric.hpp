#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace repairchain::numeric {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Neumaier's compensated summation.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Bisection for a function with f(lo) > 0 >= f(hi) (or the reverse).
/// Stops when the bracket is narrower than rel_tol * max(|lo|, |hi|) or abs_floor.
template <class Fn>
double bisect(Fn&& f, double lo, double hi, double rel_tol = 1e-13, double abs_floor = 0.0,
              int max_iter = 400) {
    const bool lo_positive = f(lo) > 0.0;
    for (int it = 0; it < max_iter; ++it) {
        const double width = hi - lo;
        const double scale = std::fmax(std::fabs(lo), std::fabs(hi));
        if (width <= rel_tol * scale || width <= abs_floor) break;
        const double mid = lo + 0.5 * width;
        if (mid <= lo || mid >= hi) break;
        if ((f(mid) > 0.0) == lo_positive) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo + 0.5 * (hi - lo);
}

/// n (n-1) ... (n-k+1) as a double.
inline double falling_factorial(double n, int k) noexcept {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= (n - i);
    return r;
}

/// Hurwitz-type tail sum_{m >= m0} m^{-s} for s > 1, m0 >= 1.
///
/// A block of terms is summed directly with compensation and the remainder is
/// closed with an Euler-Maclaurin expansion (eight Bernoulli corrections).
inline double zeta_tail(double s, double m0) {
    if (!(s > 1.0)) return kInf;
    constexpr std::array<double, 8> bernoulli{1.0 / 6.0,       -1.0 / 30.0, 1.0 / 42.0,
                                              -1.0 / 30.0,     5.0 / 66.0,  -691.0 / 2730.0,
                                              7.0 / 6.0,       -3617.0 / 510.0};
    const double direct_terms = 24.0;
    const double M = std::fmax(m0 + direct_terms, 40.0);
    CompensatedSum acc;
    for (double m = m0; m < M; m += 1.0) acc += std::pow(m, -s);

    acc += std::pow(M, 1.0 - s) / (s - 1.0);
    acc += 0.5 * std::pow(M, -s);
    // B_{2j}/(2j)! * s(s+1)...(s+2j-2) * M^{-s-2j+1}
    double rising = s;           // (s)_{2j-1}
    double factorial = 2.0;      // (2j)!
    double power = std::pow(M, -s - 1.0);
    for (std::size_t j = 1; j <= bernoulli.size(); ++j) {
        acc += bernoulli[j - 1] / factorial * rising * power;
        const double a = static_cast<double>(2 * j);
        rising *= (s + a - 1.0) * (s + a);
        factorial *= (a + 1.0) * (a + 2.0);
        power /= M * M;
    }
    return acc.value();
}

}  // namespace repairchain::numeric
