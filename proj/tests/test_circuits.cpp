// Copyright 2026 The nisqmaps Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <algorithm>
#include <numbers>

#include "nisqmaps/circuits.hpp"
#include "test_util.hpp"

using namespace nisqmaps;

namespace {

// Kolmogorov-Smirnov statistic against a continuous cdf
template <class Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        worst = std::max({worst, std::abs(f - i / n), std::abs((i + 1) / n - f)});
    }
    return worst;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

} // namespace

TEST_CASE("sample_angles") {
    const CircuitSpec a = sample_angles(3, 4, Seed{1});
    CHECK(a.angles.size() == 24u);
    CHECK(a.angles == sample_angles(3, 4, Seed{1}).angles);
    CHECK(a.angles != sample_angles(3, 4, Seed{2}).angles);
    const CircuitSpec big = sample_angles(5, 10000, Seed{3});
    for (double x : big.angles) {
        REQUIRE(x >= 0.0);
        REQUIRE(x < 2.0 * std::numbers::pi);
    }
    // uniform on [0, 2 pi): variance pi^2 / 3
    const double se = std::sqrt(std::numbers::pi * std::numbers::pi / 3.0 / big.angles.size());
    CHECK(std::abs(mean_of(big.angles) - std::numbers::pi) < 4.0 * se);
    CHECK_THROWS_AS(CircuitSpec(2, 1, std::vector<double>(3)), Error);
}

TEST_CASE("build_unitary with zero angles is the CNOT ladder") {
    CMat cnot = CMat::Zero(4, 4);
    cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1.0;
    CHECK(nisqmaps::max_abs(build_unitary(CircuitSpec(2, 1, std::vector<double>(4, 0.0))) - cnot) < 1e-15);

    // down ladder: control q_{i+1}, target q_i
    CMat rev = CMat::Zero(4, 4);
    rev(0, 0) = rev(2, 2) = rev(1, 3) = rev(3, 1) = 1.0;
    CHECK(nisqmaps::max_abs(build_unitary(CircuitSpec(2, 1, std::vector<double>(4, 0.0)), {Ladder::Down, RotationOrder::YZ}) -
                            rev) < 1e-15);

    // three qubits: CNOT(1->2) then CNOT(2->3); |100> -> |110> -> |111>
    const CMat u3 = build_unitary(CircuitSpec(3, 1, std::vector<double>(6, 0.0)));
    CHECK(std::abs(u3(7, 4) - 1.0) < 1e-15);
}

TEST_CASE("single-qubit block matches the closed form") {
    const double phi = 0.7;
    const double varphi = 2.1;
    CMat ry(2, 2);
    ry << std::cos(phi / 2), -std::sin(phi / 2), std::sin(phi / 2), std::cos(phi / 2);
    CMat rz = CMat::Zero(2, 2);
    rz(0, 0) = std::exp(cplx(0, -varphi / 2));
    rz(1, 1) = std::exp(cplx(0, varphi / 2));
    CHECK(nisqmaps::max_abs(build_unitary(CircuitSpec(1, 1, {phi, varphi})) - rz * ry) < 1e-15);
    CHECK(nisqmaps::max_abs(build_unitary(CircuitSpec(1, 1, {phi, varphi}), {Ladder::Up, RotationOrder::ZY}) - ry * rz) <
          1e-15);
    // blocks compose left to right in time
    const CMat two = build_unitary(CircuitSpec(1, 2, {phi, varphi, 0.3, -0.4}));
    CHECK(nisqmaps::max_abs(two - build_unitary(CircuitSpec(1, 1, {0.3, -0.4})) * rz * ry) < 1e-14);
}

TEST_CASE("build_unitary output is unitary") {
    for (std::uint64_t s = 0; s < 100; ++s) {
        const int n = 1 + static_cast<int>(s % 4);
        const int depth = 1 + static_cast<int>((s * 7) % 40);
        const CMat u = build_unitary(sample_angles(n, depth, Seed{s}));
        CHECK(nisqmaps::max_abs(u.adjoint() * u - CMat::Identity(u.rows(), u.cols())) < 1e-12);
    }
}

TEST_CASE("circuit_state is the first column of the unitary") {
    const CircuitSpec spec = sample_angles(3, 5, Seed{4});
    CHECK(nisqmaps::max_abs(CMat(circuit_state(spec)) - CMat(build_unitary(spec).col(0))) < 1e-13);
    const CVec zero = circuit_state(CircuitSpec(3, 1, std::vector<double>(6, 0.0)));
    CHECK(std::norm(zero(0)) == doctest::Approx(1.0));
}

TEST_CASE("fidelity_samples") {
    const auto f = fidelity_samples(2, 3, 500, Seed{5});
    CHECK(f.size() == 500u);
    for (double x : f) {
        REQUIRE(x >= 0.0);
        REQUIRE(x <= 1.0 + 1e-12);
    }
    CHECK(f == fidelity_samples(2, 3, 500, Seed{5}));

    // one qubit, deep circuit: fidelity is uniform on [0, 1]
    const auto deep = fidelity_samples(1, 20, 4000, Seed{6});
    CHECK(ks_statistic(deep, [](double x) { return x; }) < 1.95 / std::sqrt(4000.0));
}

TEST_CASE("haar fidelity density and sampler") {
    for (double f : {0.0, 0.3, 0.99}) CHECK(haar_fidelity_pdf(2, f) == doctest::Approx(1.0));
    CHECK(haar_fidelity_pdf(16, 0.0) == doctest::Approx(15.0));
    // composite Simpson
    const int n = 2000;
    double integral = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        integral += w * haar_fidelity_pdf(16, static_cast<double>(i) / n);
    }
    integral /= 3.0 * n;
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-10));

    const auto samples = haar_fidelity_samples(16, 5000, Seed{7});
    CHECK(ks_statistic(samples, [](double x) { return 1.0 - std::pow(1.0 - x, 15.0); }) < 1.95 / std::sqrt(5000.0));
}

TEST_CASE("histogram and KL") {
    const auto h = histogram({0.0, 0.01, 0.5, 0.999, 1.0}, 10);
    CHECK(h.size() == 10u);
    CHECK(h[0] == 2.0);
    CHECK(h[5] == 1.0);
    CHECK(h[9] == 2.0);
    CHECK(kl_histograms(h, h) == doctest::Approx(0.0));
    const std::vector<double> sparse{10, 0, 0};
    const std::vector<double> other{0, 0, 10};
    CHECK(std::isfinite(kl_histograms(sparse, other)));
    CHECK(kl_histograms(sparse, other) > 0.0);
    // pseudo-count 1 on each bin: p = (11,1,1)/13, q = (1,1,11)/13
    const double expected = (11.0 * std::log(11.0) + 1.0 * std::log(1.0 / 11.0)) / 13.0;
    CHECK(kl_histograms(sparse, other) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("expressibility decreases with depth") {
    const std::vector<int> depths{1, 2, 4, 8};
    std::vector<std::vector<double>> values(depths.size());
    for (std::size_t i = 0; i < depths.size(); ++i)
        for (std::uint64_t s = 0; s < 10; ++s)
            values[i].push_back(expressibility(4, depths[i], 4000, 75, derive_seed(Seed{11}, s)));
    for (const auto& row : values)
        for (double v : row) CHECK(v >= 0.0);
    for (std::size_t i = 1; i < depths.size(); ++i) {
        // allow three standard errors of the difference between seed means
        double var = 0.0;
        for (std::size_t k = 0; k < 10; ++k) {
            var += std::pow(values[i][k] - mean_of(values[i]), 2) + std::pow(values[i - 1][k] - mean_of(values[i - 1]), 2);
        }
        const double se = std::sqrt(var / 9.0 / 10.0);
        CHECK(mean_of(values[i]) <= mean_of(values[i - 1]) + 3.0 * se);
    }
    // shallow circuits are clearly less expressive
    for (std::size_t k = 0; k < 10; ++k) CHECK(values[0][k] > values[2][k]);
}

TEST_CASE("analytic and sampled baselines agree for deep circuits") {
    const double sampled = expressibility(3, 12, 8000, 75, Seed{3}, Baseline::Sampled);
    const double analytic = expressibility(3, 12, 8000, 75, Seed{3}, Baseline::Analytic);
    const double haar = haar_reference_expressibility(8, 8000, 75, Seed{4});
    CHECK(analytic < 2.0 * haar + 0.01);
    CHECK(sampled < 3.0 * haar + 0.01);
}
