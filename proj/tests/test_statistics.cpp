// Copyright 2026 The fockdet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fockdet/bayes.hpp"
#include "fockdet/statistics.hpp"
#include "fockdet/superops.hpp"
#include "test_util.hpp"

namespace fockdet {
namespace {

using testing::diagonal_of;

PhotonDistribution dist(std::vector<double> p) { return PhotonDistribution::from_probabilities(std::move(p)); }

TEST(MomentsTest, FockState) {
    const auto m = moments(make_state(family::Fock{3}, FockDimension(5)).distribution);
    EXPECT_EQ(m.mean, 3.0);
    EXPECT_EQ(m.variance, 0.0);
    EXPECT_EQ(m.vacuum_prob, 0.0);
}

TEST(MomentsTest, TwoLevelMixture) {
    const auto m = moments(dist({0.5, 0.5}));
    EXPECT_DOUBLE_EQ(m.mean, 0.5);
    EXPECT_DOUBLE_EQ(m.variance, 0.25);
    EXPECT_DOUBLE_EQ(m.vacuum_prob, 0.5);
}

TEST(MomentsTest, ThermalMomentsAgreeWithDirectSummation) {
    const auto state = make_state(family::Thermal{2.0}, FockDimension(128));
    const auto m = moments(state.distribution);
    const auto oracle = testing::thermal_oracle(2.0, 128);
    const double m1 = testing::raw_moment(oracle, 1);
    const double m2 = testing::raw_moment(oracle, 2);
    EXPECT_NEAR(m.mean, m1, 1e-12);
    EXPECT_NEAR(m.variance, m2 - m1 * m1, 1e-10);
    EXPECT_NEAR(m.mean, 2.0, 1e-6);
    EXPECT_NEAR(m.variance, 6.0, 1e-6);  // n + n^2
    EXPECT_LT(state.tail_mass, 1e-12);
}

TEST(PredictDiscreteMeanTest, Examples) {
    EXPECT_DOUBLE_EQ(predict_discrete_mean({0.5, 0.25, 0.5}), 0.0);
    EXPECT_DOUBLE_EQ(predict_discrete_mean({4.0, 0.0, 0.0}), 3.0);
    // Thermal n = 2: p(0) = 1/3, so 2 / (2/3) - 1 = 2.
    EXPECT_NEAR(predict_discrete_mean({2.0, 6.0, 1.0 / 3.0}), 2.0, 1e-15);
    try {
        predict_discrete_mean({0.0, 0.0, 1.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::VacuumState);
    }
}

TEST(PredictContinuousMeanTest, Examples) {
    EXPECT_DOUBLE_EQ(predict_continuous_mean({2.0, 2.0, 0.0}), 2.0);  // Poisson: unchanged
    EXPECT_DOUBLE_EQ(predict_continuous_mean({2.0, 6.0, 0.0}), 4.0);  // thermal: doubles
    EXPECT_DOUBLE_EQ(predict_continuous_mean({5.0, 0.0, 0.0}), 4.0);  // Fock: loses one
    EXPECT_THROW(predict_continuous_mean({0.0, 0.0, 1.0}), Error);
}

TEST(PredictionsTest, PoissonAndThermalThroughTheFullPipeline) {
    const FockDimension dim(128);
    const auto thermal = from_distribution(make_state(family::Thermal{2.0}, dim).distribution);
    const auto poisson = from_distribution(make_state(family::PoissonDiagonal{2.0}, dim).distribution);
    EXPECT_NEAR(moments(diagonal_part(subtract_one(thermal))).mean, 2.0, 1e-8);
    EXPECT_NEAR(moments(diagonal_part(one_count(thermal))).mean, 4.0, 1e-8);
    EXPECT_NEAR(moments(diagonal_part(one_count(poisson))).mean, 2.0, 1e-8);
}

TEST(PredictionsTest, FormulasMatchPipelineForGeneratedStates) {
    const FockDimension dim(128);
    std::vector<StateFamily> families;
    for (int n = 1; n <= 10; ++n) families.push_back(family::Fock{n});
    for (double m : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        families.push_back(family::Thermal{m});
        families.push_back(family::PoissonDiagonal{m});
    }
    for (const auto& f : families) {
        const auto p = make_state(f, dim).distribution;
        const auto rho = from_distribution(p);
        const auto m = moments(p);
        EXPECT_NEAR(predict_discrete_mean(m), moments(diagonal_part(subtract_one(rho))).mean, 1e-10);
        EXPECT_NEAR(predict_continuous_mean(m), moments(diagonal_part(one_count(rho))).mean, 1e-10);
    }
}

TEST(PredictionsTest, FormulasMatchPipelineForRandomStates) {
    std::mt19937_64 rng(211);
    for (int trial = 0; trial < 300; ++trial) {
        const auto p = testing::random_distribution(rng, 2 + trial % 40);
        const auto rho = from_distribution(p);
        const auto m = moments(p);
        EXPECT_NEAR(predict_discrete_mean(m), moments(diagonal_part(subtract_one(rho))).mean, 1e-10);
        EXPECT_NEAR(predict_continuous_mean(m), moments(diagonal_part(one_count(rho))).mean, 1e-10);
    }
}

TEST(PredictionsTest, DiscreteDropIsExactlyOneWithoutVacuum) {
    std::mt19937_64 rng(223);
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = testing::random_distribution_from(rng, 20, 1, 20);
        const auto m = moments(p);
        EXPECT_EQ(m.vacuum_prob, 0.0);
        EXPECT_EQ(predict_discrete_mean(m), m.mean - 1.0);
    }
}

// One count leaves a Poissonian mean unchanged; sub-Poissonian fields end
// below their pre-count mean and super-Poissonian fields above it.
TEST(PredictionsTest, SubAndSuperPoissonianDichotomy) {
    std::mt19937_64 rng(227);
    int sub = 0;
    int super = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const auto m = moments(testing::random_distribution(rng, 2 + trial % 12));
        const double after = predict_continuous_mean(m);
        if (m.variance < m.mean) {
            EXPECT_LT(after, m.mean);
            ++sub;
        } else if (m.variance > m.mean) {
            EXPECT_GT(after, m.mean);
            ++super;
        }
    }
    EXPECT_GT(sub, 0);
    EXPECT_GT(super, 0);
    EXPECT_DOUBLE_EQ(predict_continuous_mean({3.0, 3.0, 0.0}), 3.0);
}

TEST(MakeStateTest, FockAndVacuumFamilies) {
    EXPECT_EQ(make_state(family::Fock{2}, FockDimension(4)).distribution.values(),
              (std::vector<double>{0, 0, 1, 0}));
    for (int d : {2, 9, 40}) {
        const auto vac = make_state(family::Thermal{0.0}, FockDimension(d));
        EXPECT_EQ(vac.distribution[0], 1.0);
        EXPECT_EQ(vac.tail_mass, 0.0);
    }
}

TEST(MakeStateTest, PoissonSeriesAndTail) {
    const auto state = make_state(family::PoissonDiagonal{1.0}, FockDimension(32));
    const auto oracle = testing::poisson_oracle(1.0, 32);
    EXPECT_LE(testing::max_abs_diff(state.distribution.values(), oracle), 1e-16);
    EXPECT_LT(state.tail_mass, 1e-20);
    EXPECT_GT(state.tail_mass, 0.0);
    // The tail is dominated by its first term e^-1 / 32!.
    EXPECT_NEAR(state.tail_mass / (std::exp(-1.0) / std::tgamma(33.0)), 1.0, 0.05);
}

TEST(MakeStateTest, ThermalTailIsGeometric) {
    const auto state = make_state(family::Thermal{1.0}, FockDimension(10));
    EXPECT_DOUBLE_EQ(state.tail_mass, std::ldexp(1.0, -10));
}

TEST(MakeStateTest, OutOfRangeRequests) {
    auto kind = [](const StateFamily& f, int d) {
        try {
            make_state(f, FockDimension(d));
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::InvalidArgument;
    };
    EXPECT_EQ(kind(family::Fock{4}, 4), ErrorKind::OutOfRange);
    EXPECT_EQ(kind(family::Fock{-1}, 4), ErrorKind::OutOfRange);
    EXPECT_EQ(kind(family::Thermal{-0.5}, 4), ErrorKind::OutOfRange);
    EXPECT_EQ(kind(family::PoissonDiagonal{std::nan("")}, 4), ErrorKind::OutOfRange);
    EXPECT_EQ(kind(family::Custom{{0.2, 0.2, 0.2, 0.2, 0.2}}, 4), ErrorKind::OutOfRange);
    EXPECT_EQ(kind(family::Custom{{0.2, 0.2}}, 4), ErrorKind::InvalidState);
}

TEST(MakeStateTest, CustomIsPadded) {
    const auto s = make_state(family::Custom{{0.5, 0.3, 0.2}}, FockDimension(6));
    EXPECT_EQ(s.distribution.size(), 6u);
    EXPECT_EQ(s.distribution[5], 0.0);
}

}  // namespace
}  // namespace fockdet
