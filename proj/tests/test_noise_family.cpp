// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <utility>

#include <doctest.h>

#include "scalereg/asymptotics.hpp"
#include "scalereg/errors.hpp"
#include "scalereg/noise_family.hpp"
#include "scalereg/rng.hpp"
#include "test_util.hpp"

using namespace scalereg;

namespace {

// Gamma-shape grids used throughout (families 2-3 stay in the efficiency
// domain; family 1 includes the sub-Gaussian and heavy regimes).
const std::vector<std::pair<int, double>> kGrid = {
    {1, 0.75}, {1, 1.0}, {1, 2.0}, {1, 3.0}, {1, 5.0}, {1, 7.0},
    {2, 2.5},  {2, 3.0}, {2, 5.0}, {2, 7.0},
    {3, 2.5},  {3, 3.0}, {3, 5.0}, {3, 7.0},
};

}  // namespace

TEST_CASE("family constants match their Gamma-function expressions") {
    // Frozen from 40-digit evaluation of the defining formulas.
    const auto k12 = NoiseFamily::make(1, 2.0).constants();
    CHECK(k12.c == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(k12.d == doctest::Approx(0.39894228040143268).epsilon(1e-13));

    const auto k13 = NoiseFamily::make(1, 3.0).constants();
    CHECK(k13.c == doctest::Approx(0.22806354781134761).epsilon(1e-13));
    CHECK(k13.d == doctest::Approx(0.34209532171702142).epsilon(1e-13));

    const auto k23 = NoiseFamily::make(2, 3.0).constants();
    CHECK(k23.c == doctest::Approx(std::sqrt(12.0)).epsilon(1e-13));
    CHECK(k23.d == doctest::Approx(10.392304845413264).epsilon(1e-13));

    const auto k225 = NoiseFamily::make(2, 2.5).constants();
    CHECK(k225.c == doctest::Approx(2.9580398915498080).epsilon(1e-13));
    CHECK(k225.d == doctest::Approx(5.6603576226285202).epsilon(1e-13));

    const auto k32 = NoiseFamily::make(3, 2.0).constants();
    CHECK(k32.c == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(k32.d == doctest::Approx(1.0).epsilon(1e-13));

    const auto k33 = NoiseFamily::make(3, 3.0).constants();
    CHECK(k33.c == doctest::Approx(0.85772456620478033).epsilon(1e-13));
    CHECK(k33.d == doctest::Approx(1.2865868493071705).epsilon(1e-13));
}

TEST_CASE("invalid family parameters are rejected") {
    CHECK_THROWS_AS(NoiseFamily::make(0, 2.0), DomainError);
    CHECK_THROWS_AS(NoiseFamily::make(4, 2.0), DomainError);
    CHECK_THROWS_AS(NoiseFamily::make(1, 0.0), DomainError);
    CHECK_THROWS_AS(NoiseFamily::make(2, 0.9), DomainError);
    CHECK_THROWS_AS(NoiseFamily::make(3, -1.0), DomainError);
    CHECK_THROWS_AS(ScaledNoise::make(NoiseFamily::make(1, 2.0), 0.0), DomainError);
}

TEST_CASE("density values and the scale-family identity") {
    const ScaledNoise gauss = ScaledNoise::make(NoiseFamily::make(1, 2.0), 1.0);
    CHECK(gauss.density(0.0) == doctest::Approx(0.39894228040143268).epsilon(1e-13));

    const ScaledNoise f23 = ScaledNoise::make(NoiseFamily::make(2, 3.0), 1.0);
    CHECK(f23.density(0.0) == 0.0);

    Rng rng(7, 0);
    for (const auto& [family, gamma] : kGrid) {
        const NoiseFamily fam = NoiseFamily::make(family, gamma);
        const ScaledNoise unit = ScaledNoise::make(fam, 1.0);
        const ScaledNoise doubled = ScaledNoise::make(fam, 2.0);
        for (int k = 0; k < 20; ++k) {
            const double t = rng.uniform(-8.0, 8.0);
            CHECK(doubled.density(t) ==
                  doctest::Approx(0.5 * unit.density(t / 2.0)).epsilon(1e-13));
        }
    }
}

TEST_CASE("closed-form scores match the defining derivative") {
    const ScaledNoise gauss = ScaledNoise::make(NoiseFamily::make(1, 2.0), 1.0);
    CHECK(gauss.log_density_and_score(1.5).second == doctest::Approx(-1.5).epsilon(1e-13));

    // family 2, gamma 3: (gamma-1)/t - c at t = 0.5
    const ScaledNoise f23 = ScaledNoise::make(NoiseFamily::make(2, 3.0), 1.0);
    CHECK(f23.log_density_and_score(0.5).second ==
          doctest::Approx(4.0 - std::sqrt(12.0)).epsilon(1e-13));

    // evenness: scores at t and -t are negatives of each other
    Rng rng(11, 0);
    for (const auto& [family, gamma] : kGrid) {
        const ScaledNoise noise = ScaledNoise::make(NoiseFamily::make(family, gamma), 1.3);
        for (int k = 0; k < 10; ++k) {
            const double t = rng.uniform(0.05, 10.0);
            CHECK(noise.log_density_and_score(t).second ==
                  doctest::Approx(-noise.log_density_and_score(-t).second).epsilon(1e-12));
        }
    }
}

TEST_CASE("score singularity at zero for families 2 and 3") {
    CHECK_THROWS_AS(ScaledNoise::make(NoiseFamily::make(2, 3.0), 1.0)
                        .log_density_and_score(0.0),
                    DomainError);
    CHECK_THROWS_AS(ScaledNoise::make(NoiseFamily::make(3, 2.5), 1.0)
                        .log_density_and_score(0.0),
                    DomainError);
}

TEST_CASE("scores agree with central differences of the log density") {
    Rng rng(23, 0);
    int checked = 0;
    while (checked < 200) {
        const auto& [family, gamma] = kGrid[rng.below(kGrid.size())];
        const ScaledNoise noise =
            ScaledNoise::make(NoiseFamily::make(family, gamma), rng.uniform(0.5, 3.0));
        double t = rng.uniform(0.05, 10.0);
        if (rng.coin_flip()) t = -t;
        const double h = 1e-6 * (1.0 + std::abs(t));
        const double fd = (noise.log_density_and_score(t + h).first -
                           noise.log_density_and_score(t - h).first) /
                          (2.0 * h);
        const double analytic = noise.log_density_and_score(t).second;
        CHECK(std::abs(analytic - fd) <= 1e-6 * std::max(1.0, std::abs(analytic)));
        ++checked;
    }
}

TEST_CASE("samplers hit the standardized moments") {
    SUBCASE("family 1 Gaussian case: unit variance") {
        Rng rng(101, 0);
        const auto xs = ScaledNoise::make(NoiseFamily::make(1, 2.0), 1.0).sample(rng, 1000000);
        double ss = 0.0;
        for (const double x : xs) ss += x * x;
        const double var = ss / static_cast<double>(xs.size());
        CHECK(var > 0.99);
        CHECK(var < 1.01);
    }
    SUBCASE("family 2 symmetric: near-zero mean") {
        Rng rng(102, 0);
        const auto xs = ScaledNoise::make(NoiseFamily::make(2, 3.0), 1.0).sample(rng, 1000000);
        double sum = 0.0;
        for (const double x : xs) sum += x;
        CHECK(std::abs(sum / static_cast<double>(xs.size())) < 0.01);
    }
    SUBCASE("scale identity: variance scales as s^2") {
        Rng rng1(103, 0), rng3(103, 0);
        const NoiseFamily fam = NoiseFamily::make(3, 3.0);
        const auto a = ScaledNoise::make(fam, 1.0).sample(rng1, 200000);
        const auto b = ScaledNoise::make(fam, 3.0).sample(rng3, 200000);
        double va = 0.0, vb = 0.0;
        for (const double x : a) va += x * x;
        for (const double x : b) vb += x * x;
        CHECK(vb / va == doctest::Approx(9.0).epsilon(0.05));
    }
    SUBCASE("count zero gives an empty vector") {
        Rng rng(104, 0);
        CHECK(ScaledNoise::make(NoiseFamily::make(1, 1.0), 1.0).sample(rng, 0).empty());
    }
}

TEST_CASE("sampler law sanity via quadrature CDF (small n)") {
    Rng rng(105, 0);
    const ScaledNoise noise = ScaledNoise::make(NoiseFamily::make(3, 3.0), 1.4);
    const double ks = test::ks_distance_quadrature(noise, noise.sample(rng, 20000));
    CHECK(ks < 0.02);
}

TEST_CASE("densities integrate to one with unit second moment") {
    for (const auto& [family, gamma] : kGrid) {
        const NoiseFamily fam = NoiseFamily::make(family, gamma);
        CHECK(quad_density_mass(fam) == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(quad_second_moment(fam) == doctest::Approx(1.0).epsilon(1e-8));
    }
}
