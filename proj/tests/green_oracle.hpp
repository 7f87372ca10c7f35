#pragma once

#include <cstddef>
#include <vector>

#include "repairchain/model.hpp"

namespace test_oracle {

// P(X_n = 0 | X_0 = 0) for n <= n_max by pushing the state distribution forward.
// States above n_max are dropped: from there the chain cannot reach 0 within n_max steps,
// so the probabilities read at state 0 are exact.
inline std::vector<double> green_by_state_evolution(const repairchain::JumpModel& m, std::size_t n_max) {
    const std::size_t S = n_max;
    std::vector<double> jump(S + 2);
    for (std::size_t j = 0; j < jump.size(); ++j) jump[j] = m.coefficient(j);
    std::vector<double> dist(S + 1, 0.0), next(S + 1);
    dist[0] = 1.0;
    std::vector<double> u{1.0};
    for (std::size_t n = 1; n <= n_max; ++n) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i <= S; ++i) {
            if (dist[i] == 0.0) continue;
            const std::size_t base = i > 0 ? i - 1 : 0;
            for (std::size_t j = base; j <= S; ++j) next[j] += dist[i] * jump[j - base];
        }
        dist.swap(next);
        u.push_back(dist[0]);
    }
    return u;
}

}  // namespace test_oracle
