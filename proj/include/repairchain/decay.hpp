#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "model.hpp"

namespace repairchain {

enum class DecayCase {
    TransientTilt,      // mu > 1: R0 = R1 = x0/G(x0), F(R0) = x0 < 1
    BoundaryCase,       // mu < 1, G'(R) < inf, G(R) > R G'(R): R1 = R/G(R), F(R1) = R
    InteriorCritical,   // mu < 1, x0 > 1 exists: R1 = x0/G(x0), F(R1) = x0
    CriticalRadiusOne,  // mu < 1, R = 1: R1 = 1
    NullRecurrent,      // mu = 1: R0 = R1 = x0 = 1
};

inline std::string_view to_string(DecayCase c) noexcept {
    switch (c) {
        case DecayCase::TransientTilt: return "transient_tilt";
        case DecayCase::BoundaryCase: return "boundary";
        case DecayCase::InteriorCritical: return "interior_critical";
        case DecayCase::CriticalRadiusOne: return "critical_radius_one";
        case DecayCase::NullRecurrent: return "null_recurrent";
    }
    return "unknown";
}

struct DecayParams {
    std::optional<double> x0;
    double R0 = 1.0;
    double R1 = 1.0;
    double F_at_R1 = 1.0;
    DecayCase case_label = DecayCase::NullRecurrent;
};

/// xi(x) = G(x) - x G'(x); strictly decreasing, xi(0) = a_0.
inline double xi(const JumpModel& model, double x) {
    return model.derivative(x, 0) - x * model.derivative(x, 1);
}

/// eta(x) = x / G(x); increasing up to x0 and decreasing after it.
inline double eta(const JumpModel& model, double x) { return x / model.derivative(x, 0); }

/// Unique root of G(x) = x G'(x) on (0, R], or nullopt when xi > 0 throughout.
inline std::optional<double> find_x0(const JumpModel& model) {
    const ChainClass cls = classify(model);
    if (cls == ChainClass::NullRecurrent) return 1.0;
    if (model.is_series()) {
        // HalfStable is critical at y = 1, so every tilt of it has its root at the radius.
        // PowerZeta has xi(1) = 1 - mu > 0 on its whole (closed) domain.
        if (model.family() == Family::HalfStable) return model.radius();
        return std::nullopt;
    }
    const auto f = [&](double x) { return xi(model, x); };
    constexpr double kTol = 1e-15;
    if (cls == ChainClass::Transient) return numeric::bisect(f, 0.0, 1.0, kTol);

    double hi = 2.0;
    if (model.family() == Family::Geometric) {
        // G'(R) = inf, so xi -> -inf at the radius
        const double R = model.radius();
        double gap = 0.5 * (R - 1.0);
        hi = R - gap;
        while (!(f(hi) < 0.0)) {
            gap *= 0.5;
            if (gap < R * std::numeric_limits<double>::epsilon()) return std::nullopt;
            hi = R - gap;
        }
    } else {
        // polynomial of degree >= 2: xi has a negative leading coefficient
        while (!(f(hi) < 0.0)) {
            hi *= 2.0;
            if (!std::isfinite(hi)) return std::nullopt;
        }
    }
    return numeric::bisect(f, 1.0, hi, kTol);
}

inline DecayParams decay_params(const JumpModel& model) {
    DecayParams d;
    switch (classify(model)) {
        case ChainClass::NullRecurrent:
            d.x0 = 1.0;
            d.case_label = DecayCase::NullRecurrent;
            return d;
        case ChainClass::Transient: {
            d.x0 = find_x0(model);
            d.R0 = d.R1 = eta(model, *d.x0);
            d.F_at_R1 = *d.x0;
            d.case_label = DecayCase::TransientTilt;
            return d;
        }
        case ChainClass::PositiveRecurrent: break;
    }
    const double R = model.radius();
    if (R == 1.0) {
        d.case_label = DecayCase::CriticalRadiusOne;
        return d;
    }
    d.x0 = find_x0(model);
    if (d.x0) {
        d.R1 = eta(model, *d.x0);
        d.F_at_R1 = *d.x0;
        d.case_label = DecayCase::InteriorCritical;
    } else {
        d.R1 = eta(model, R);
        d.F_at_R1 = R;
        d.case_label = DecayCase::BoundaryCase;
    }
    return d;
}

/// Exponentially tilted law a_j x^j / G(x).
inline JumpModel tilt(const JumpModel& model, double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw OutOfRadius(x);
    if (x == 1.0) return model;
    const double Gx = model.derivative(x, 0);
    if (!std::isfinite(Gx)) throw OutOfRadius(x);
    switch (model.family()) {
        case Family::Geometric: {
            const double p = 1.0 - (1.0 - model.parameter()) * x;
            return JumpModel::geometric(p);
        }
        case Family::Explicit: {
            const auto a = model.coefficients();
            std::vector<double> tilted(a.size());
            double power = 1.0;
            for (std::size_t j = 0; j < a.size(); ++j) {
                tilted[j] = a[j] * power / Gx;
                power *= x;
            }
            return JumpModel::explicit_jumps(std::move(tilted));
        }
        default: {
            double s = model.tilt_scale() * x;
            if (std::fabs(s - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon()) s = 1.0;
            if (s > 1.0) throw OutOfRadius(x);
            ModelSpec base = model.spec();
            base.tilt = 1.0;
            return JumpModel::tilted_series(build_model(base), s);
        }
    }
}

}  // namespace repairchain
