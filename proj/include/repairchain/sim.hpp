#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "model.hpp"

namespace repairchain {

struct SimReport {
    enum class Kind { Tau, LastExit };
    Kind kind = Kind::Tau;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    std::uint64_t limit = 0;                   // cap for tau, horizon for L
    std::map<std::uint64_t, std::uint64_t> hist;
    std::uint64_t censored = 0;

    [[nodiscard]] std::uint64_t count(std::uint64_t n) const {
        const auto it = hist.find(n);
        return it == hist.end() ? 0 : it->second;
    }

    void merge(const SimReport& other) {
        samples += other.samples;
        censored += other.censored;
        for (const auto& [n, c] : other.hist) hist[n] += c;
    }

    friend bool operator==(const SimReport&, const SimReport&) = default;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Independent stream for sample `index`; depends only on (seed, index).
class SampleStream {
public:
    SampleStream(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t s = seed;
        state_ = splitmix64(s) ^ (index * 0xD1B54A32D192ED03ULL);
        splitmix64(state_);
    }
    /// Uniform on (0, 1].
    double open_closed() noexcept { return (static_cast<double>(splitmix64(state_) >> 11) + 1.0) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

inline constexpr std::uint64_t kHugeJump = std::uint64_t{1} << 62;

/// Inverse-CDF sampler for the jump law: J = min{n : P(J > n) < v} with v uniform on (0,1].
class JumpSampler {
public:
    explicit JumpSampler(const JumpModel& model) : model_(model) {
        if (model.family() == Family::Geometric) return;
        const auto a = model.coefficients();
        // survival[n] = P(J > n), accumulated from the certified tail upward
        survival_.resize(a.size());
        numeric::CompensatedSum acc;
        acc += model.family() == Family::Explicit ? 0.0 : model.cached_tail_mass();
        for (std::size_t n = a.size(); n-- > 0;) {
            survival_[n] = acc.value();
            acc += a[n];
        }
    }

    [[nodiscard]] std::uint64_t operator()(double v) const {
        if (model_.family() == Family::Geometric) {
            const double j = std::floor(std::log(v) / std::log1p(-model_.parameter()));
            return j >= static_cast<double>(kHugeJump) ? kHugeJump : static_cast<std::uint64_t>(j);
        }
        // survival_ is nonincreasing; first index with survival < v
        const auto it = std::partition_point(survival_.begin(), survival_.end(), [v](double s) { return s >= v; });
        if (it != survival_.end()) return static_cast<std::uint64_t>(it - survival_.begin());
        return tail_jump(v);
    }

private:
    /// Beyond the cache: walk the coefficients down from the cached tail mass.
    [[nodiscard]] std::uint64_t tail_jump(double v) const {
        std::size_t n = survival_.size();
        double s = survival_.empty() ? 1.0 : survival_.back();
        if (model_.family() == Family::Explicit) return n == 0 ? 0 : n - 1;
        if (model_.tilt_scale() == 1.0) return untilted_tail_jump(v);
        while (n < kHugeJump) {
            s -= model_.coefficient(n);
            if (s < v || s <= 0.0) return n;
            ++n;
        }
        return kHugeJump;
    }

    /// Untilted series families have closed-form survival functions.
    [[nodiscard]] std::uint64_t untilted_tail_jump(double v) const {
        const double alpha = model_.parameter();
        const auto survival = [&](double n) {
            if (model_.family() == Family::PowerZeta) return std::pow(n + 2.0, -alpha);
            // (2/3) |binom(1/2, n)| = (2/3) Gamma(n - 1/2) / (2 sqrt(pi) Gamma(n + 1))
            return (2.0 / 3.0) * std::exp(std::lgamma(n - 0.5) - std::lgamma(n + 1.0)) / (2.0 * std::sqrt(std::numbers::pi));
        };
        double lo = static_cast<double>(survival_.size()) - 1.0;
        double hi = std::max(2.0 * lo, 2.0);
        while (survival(hi) >= v) {
            lo = hi;
            hi *= 2.0;
            if (hi >= static_cast<double>(kHugeJump)) return kHugeJump;
        }
        while (hi - lo > 1.0) {
            const double mid = std::floor(0.5 * (lo + hi));
            (survival(mid) >= v ? lo : hi) = mid;
        }
        return static_cast<std::uint64_t>(hi);
    }

    JumpModel model_;
    std::vector<double> survival_;
};

inline unsigned worker_count(std::uint64_t samples, unsigned requested) {
    unsigned n = requested;
    if (n == 0) {
        n = std::max(1u, std::thread::hardware_concurrency());
        if (const char* env = std::getenv("REPAIRCHAIN_THREADS")) {
            const long v = std::strtol(env, nullptr, 10);
            if (v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
        }
    }
    return static_cast<unsigned>(std::clamp<std::uint64_t>(samples, 1, n));
}

/// Runs `one(stream, report)` for every sample index, split into contiguous chunks across workers.
template <class OnePath>
SimReport run_samples(SimReport base, unsigned threads, OnePath one) {
    const unsigned workers = worker_count(base.samples, threads);
    std::vector<SimReport> parts(workers);
    const auto work = [&](unsigned w) {
        SimReport& part = parts[w];
        const std::uint64_t begin = base.samples * w / workers;
        const std::uint64_t end = base.samples * (w + 1) / workers;
        part.samples = end - begin;
        for (std::uint64_t i = begin; i < end; ++i) {
            SampleStream stream(base.seed, i);
            one(stream, part);
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }
    const std::uint64_t total = base.samples;
    base.samples = 0;
    for (const auto& p : parts) base.merge(p);
    if (base.samples != total) throw std::logic_error("sample partition lost paths");
    return base;
}

}  // namespace detail

/// First-return times started from 0, censored at `cap` steps.
/// threads = 0 picks hardware concurrency, capped by REPAIRCHAIN_THREADS.
inline SimReport sample_tau(const JumpModel& model, std::uint64_t seed, std::uint64_t samples, std::uint64_t cap,
                            unsigned threads = 0) {
    if (cap < 1) throw std::invalid_argument("cap must be >= 1");
    const detail::JumpSampler jump(model);
    SimReport base;
    base.kind = SimReport::Kind::Tau;
    base.samples = samples;
    base.seed = seed;
    base.limit = cap;
    return detail::run_samples(base, threads, [&](detail::SampleStream& rng, SimReport& out) {
        std::uint64_t x = 0;
        for (std::uint64_t n = 1; n <= cap; ++n) {
            x = (x > 0 ? x - 1 : 0) + jump(rng.open_closed());
            if (x == 0) {
                ++out.hist[n];
                return;
            }
            // the state falls by at most one per step
            if (x > cap - n) break;
        }
        ++out.censored;
    });
}

/// Last visit to 0 within `horizon` steps, started from 0. A path whose last
/// visit lies in the final tenth of the horizon is reported as censored.
inline SimReport sample_last_exit(const JumpModel& model, std::uint64_t seed, std::uint64_t samples,
                                  std::uint64_t horizon, unsigned threads = 0) {
    if (classify(model) != ChainClass::Transient) throw NotTransient();
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    const detail::JumpSampler jump(model);
    const std::uint64_t guard = horizon - horizon / 10;
    SimReport base;
    base.kind = SimReport::Kind::LastExit;
    base.samples = samples;
    base.seed = seed;
    base.limit = horizon;
    return detail::run_samples(base, threads, [&](detail::SampleStream& rng, SimReport& out) {
        std::uint64_t x = 0;
        std::uint64_t last = 0;
        for (std::uint64_t n = 1; n <= horizon; ++n) {
            x = (x > 0 ? x - 1 : 0) + jump(rng.open_closed());
            if (x == 0) last = n;
            if (x > horizon - n) break;
        }
        if (last >= guard && horizon >= 10) ++out.censored;
        else ++out.hist[last];
    });
}

}  // namespace repairchain
