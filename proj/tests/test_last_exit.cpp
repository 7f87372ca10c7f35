#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "repairchain/last_exit.hpp"
#include "repairchain/series_tools.hpp"

using namespace repairchain;

TEST(ExitPmf, GeometricQuarter) {
    const auto ea = exit_pmf(JumpModel::geometric(0.25), 64);
    EXPECT_NEAR(ea.q_exit, 2.0 / 3.0, 1e-14);
    EXPECT_NEAR(ea.pmf[0], 2.0 / 3.0, 1e-14);
    EXPECT_NEAR(ea.pmf[1], 1.0 / 6.0, 1e-14);
    // two steps: 0 -> 0 -> 0 or 0 -> 1 -> 0
    EXPECT_NEAR(ea.pmf[2], (2.0 / 3.0) * (0.25 * 0.25 + 0.25 * 0.75 * 0.25), 1e-14);
    EXPECT_NEAR(ea.tilted.mean(), 1.0, 1e-10);
}

TEST(ExitPmf, ProportionalToGreenSequence) {
    const auto m = JumpModel::explicit_jumps({0.2, 0.3, 0.5});
    const auto ea = exit_pmf(m, 200);
    const auto ra = return_pmf(m, 200);
    for (std::size_t n = 0; n <= 200; ++n) EXPECT_NEAR(ea.pmf[n], ea.q_exit * ra.u[n], 1e-16);
    EXPECT_NEAR(ea.q_exit, 0.6, 1e-14);
}

TEST(ExitPmf, MassWithinCertifiedTail) {
    const auto m = JumpModel::geometric(0.25);
    double prev = 0.0;
    for (std::size_t N : {16u, 64u, 256u}) {
        const auto ea = exit_pmf(m, N);
        double total = 0.0;
        for (double v : ea.pmf) total += v;
        EXPECT_GE(total, prev);
        EXPECT_LE(total, 1.0 + 1e-12);
        EXPECT_GE(total + ea.q_exit * ea.u_tail_bound, 1.0 - 1e-12);
        prev = total;
    }
}

TEST(ExitPmf, RecurrentChainsHaveNoLastExit) {
    EXPECT_THROW(exit_pmf(JumpModel::geometric(0.5)), NotTransient);
    EXPECT_THROW(exit_pmf(JumpModel::half_stable()), NotTransient);
    EXPECT_THROW(exit_pmf(JumpModel::geometric(0.75)), NotTransient);
}

TEST(ExitVerdict, WorkedExamples) {
    const auto m = JumpModel::geometric(0.25);
    EXPECT_EQ(exit_weighted_verdict(m, 0).verdict, Finiteness::Finite);
    EXPECT_EQ(exit_weighted_verdict(m, 1).verdict, Finiteness::Infinite);
    EXPECT_EQ(exit_weighted_verdict(m, 2).verdict, Finiteness::Infinite);
    EXPECT_EQ(exit_weighted_verdict(m, 0, 0.4).verdict, Finiteness::Finite);
    EXPECT_EQ(exit_weighted_verdict(m, 0, 0.6).verdict, Finiteness::Infinite);
    EXPECT_EQ(exit_weighted_verdict(m, 0, 1.0).verdict, Finiteness::Infinite);
    EXPECT_EQ(exit_weighted_verdict(m, 0, 0.4).quantity, "E(R0^L L^0.4)");
    EXPECT_THROW(exit_weighted_verdict(JumpModel::geometric(0.5), 0), NotTransient);
    EXPECT_THROW(exit_weighted_verdict(m, 0, 1.5), std::invalid_argument);
}

TEST(ExitVerdict, NumericSumsFollowTheThreshold) {
    // sum R0^n n^alpha P(L=n): terms ~ n^{alpha - 3/2}
    const auto m = JumpModel::geometric(0.25);
    const auto ea = exit_pmf(m, 2000);
    const double R0 = decay_params(m).R0;
    const auto sums = [&](double alpha) {
        std::vector<PartialSum> out;
        double acc = 0.0;
        double r = 1.0;
        for (std::size_t n = 0; n <= 2000; ++n) {
            acc += r * std::pow(static_cast<double>(n), alpha) * ea.pmf[n];
            r *= R0;
            if (n == 20 || n == 200 || n == 2000) out.push_back({n, acc});
        }
        return out;
    };
    const auto summable = block_ratio(sums(0.4));
    const auto divergent = block_ratio(sums(0.6));
    ASSERT_TRUE(summable && divergent);
    EXPECT_LT(*summable, 0.9);
    EXPECT_GE(*divergent, 0.9);
}
