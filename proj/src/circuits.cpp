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

#include "nisqmaps/circuits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nisqmaps/parallel.hpp"

namespace nisqmaps {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::Matrix2cd ry(double theta) {
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    Eigen::Matrix2cd m;
    m << c, -s, s, c;
    return m;
}

Eigen::Matrix2cd rz(double theta) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    m(0, 0) = std::polar(1.0, -theta / 2.0);
    m(1, 1) = std::polar(1.0, theta / 2.0);
    return m;
}

// Qubit q (0-based) is bit n-1-q of the basis index.
void apply_1q(CVec& psi, int n, int q, const Eigen::Matrix2cd& g) {
    const Index stride = Index{1} << (n - 1 - q);
    for (Index base = 0; base < psi.size(); ++base) {
        if (base & stride) continue;
        const cplx a = psi(base);
        const cplx b = psi(base | stride);
        psi(base) = g(0, 0) * a + g(0, 1) * b;
        psi(base | stride) = g(1, 0) * a + g(1, 1) * b;
    }
}

void apply_cnot(CVec& psi, int n, int control, int target) {
    const Index cbit = Index{1} << (n - 1 - control);
    const Index tbit = Index{1} << (n - 1 - target);
    for (Index i = 0; i < psi.size(); ++i) {
        if ((i & cbit) && !(i & tbit)) std::swap(psi(i), psi(i | tbit));
    }
}

void apply_block(CVec& psi, const CircuitSpec& spec, int block, const CircuitOptions& opts) {
    const int n = spec.n;
    const double* phi = spec.angles.data() + static_cast<std::size_t>(2 * n * block);
    const double* varphi = phi + n;
    auto y_layer = [&] { for (int q = 0; q < n; ++q) apply_1q(psi, n, q, ry(phi[q])); };
    auto z_layer = [&] { for (int q = 0; q < n; ++q) apply_1q(psi, n, q, rz(varphi[q])); };
    if (opts.rot_order == RotationOrder::YZ) {
        y_layer();
        z_layer();
    } else {
        z_layer();
        y_layer();
    }
    if (opts.ladder == Ladder::Up) {
        for (int q = 0; q + 1 < n; ++q) apply_cnot(psi, n, q, q + 1);
    } else {
        for (int q = n - 1; q >= 1; --q) apply_cnot(psi, n, q, q - 1);
    }
}

void apply_circuit(CVec& psi, const CircuitSpec& spec, const CircuitOptions& opts) {
    for (int block = 0; block < spec.depth; ++block) apply_block(psi, spec, block, opts);
}

} // namespace

CircuitSpec::CircuitSpec(int qubits, int blocks, std::vector<double> values)
    : n(qubits), depth(blocks), angles(std::move(values)) {
    if (n < 1 || depth < 1) throw Error(ErrorCode::InvalidArgument, "CircuitSpec: n and depth must be >= 1");
    if (n > 20) throw Error(ErrorCode::InvalidArgument, "CircuitSpec: n too large");
    if (angles.size() != static_cast<std::size_t>(2 * n * depth)) {
        throw Error(ErrorCode::SizeMismatch, "CircuitSpec: expected 2 n depth angles");
    }
}

CircuitSpec sample_angles(int n, int depth, Seed seed) {
    if (n < 1 || depth < 1) throw Error(ErrorCode::InvalidArgument, "sample_angles: n and depth must be >= 1");
    Rng rng(seed);
    std::vector<double> angles(static_cast<std::size_t>(2 * n * depth));
    for (double& a : angles) a = kTwoPi * rng.uniform();
    return CircuitSpec(n, depth, std::move(angles));
}

CMat build_unitary(const CircuitSpec& spec, const CircuitOptions& opts) {
    const Index d = spec.dim();
    CMat u(d, d);
    for (Index col = 0; col < d; ++col) {
        CVec psi = CVec::Zero(d);
        psi(col) = 1.0;
        apply_circuit(psi, spec, opts);
        u.col(col) = psi;
    }
    return u;
}

CVec circuit_state(const CircuitSpec& spec, const CircuitOptions& opts) {
    CVec psi = CVec::Zero(spec.dim());
    psi(0) = 1.0;
    apply_circuit(psi, spec, opts);
    return psi;
}

std::vector<double> fidelity_samples(int n, int depth, std::size_t n_samples, Seed seed,
                                     const CircuitOptions& opts) {
    if (n_samples < 1) throw Error(ErrorCode::InvalidArgument, "fidelity_samples: need at least one sample");
    std::vector<double> out(n_samples);
    parallel_for(n_samples, [&](std::size_t i) {
        const CircuitSpec spec = sample_angles(n, depth, derive_seed(seed, i));
        out[i] = std::norm(circuit_state(spec, opts)(0));
    });
    return out;
}

std::vector<double> haar_fidelity_samples(Index d, std::size_t n_samples, Seed seed) {
    if (d < 2) throw Error(ErrorCode::InvalidArgument, "haar_fidelity_samples: d >= 2 required");
    Rng rng(seed);
    std::vector<double> out(n_samples);
    const double power = 1.0 / static_cast<double>(d - 1);
    for (double& f : out) f = 1.0 - std::pow(rng.uniform(), power);
    return out;
}

double haar_fidelity_pdf(Index d, double f) {
    if (d < 2) throw Error(ErrorCode::InvalidArgument, "haar_fidelity_pdf: d >= 2 required");
    if (f < 0.0 || f > 1.0) throw Error(ErrorCode::InvalidArgument, "haar_fidelity_pdf: F outside [0, 1]");
    return static_cast<double>(d - 1) * std::pow(1.0 - f, static_cast<double>(d - 2));
}

std::vector<double> histogram(const std::vector<double>& samples, int bins) {
    if (bins < 1) throw Error(ErrorCode::InvalidArgument, "histogram: bins must be >= 1");
    std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
    for (double f : samples) {
        const int b = std::clamp(static_cast<int>(std::floor(f * bins)), 0, bins - 1);
        counts[static_cast<std::size_t>(b)] += 1.0;
    }
    return counts;
}

double kl_histograms(const std::vector<double>& p_counts, const std::vector<double>& q_counts, double pseudo) {
    if (p_counts.size() != q_counts.size() || p_counts.empty()) {
        throw Error(ErrorCode::SizeMismatch, "kl_histograms: histograms differ in length");
    }
    double p_total = 0.0;
    double q_total = 0.0;
    for (std::size_t i = 0; i < p_counts.size(); ++i) {
        p_total += p_counts[i] + pseudo;
        q_total += q_counts[i] + pseudo;
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < p_counts.size(); ++i) {
        const double p = (p_counts[i] + pseudo) / p_total;
        const double q = (q_counts[i] + pseudo) / q_total;
        if (p > 0.0) kl += p * std::log(p / q);
    }
    return std::max(kl, 0.0);
}

double expressibility(int n, int depth, std::size_t n_samples, int bins, Seed seed, Baseline baseline,
                      const CircuitOptions& opts) {
    const Index d = Index{1} << n;
    const auto circuit = histogram(fidelity_samples(n, depth, n_samples, derive_seed(seed, "circuit"), opts), bins);
    std::vector<double> reference;
    if (baseline == Baseline::Sampled) {
        reference = histogram(haar_fidelity_samples(d, n_samples, derive_seed(seed, "haar")), bins);
    } else {
        reference.resize(static_cast<std::size_t>(bins));
        const double power = static_cast<double>(d - 1);
        for (int b = 0; b < bins; ++b) {
            const double lo = static_cast<double>(b) / bins;
            const double hi = static_cast<double>(b + 1) / bins;
            const double mass = std::pow(1.0 - lo, power) - std::pow(1.0 - hi, power);
            reference[static_cast<std::size_t>(b)] = mass * static_cast<double>(n_samples);
        }
    }
    return kl_histograms(circuit, reference);
}

double haar_reference_expressibility(Index d, std::size_t n_samples, int bins, Seed seed) {
    const auto a = histogram(haar_fidelity_samples(d, n_samples, derive_seed(seed, "haar-a")), bins);
    const auto b = histogram(haar_fidelity_samples(d, n_samples, derive_seed(seed, "haar-b")), bins);
    return kl_histograms(a, b);
}

} // namespace nisqmaps
