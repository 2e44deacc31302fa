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

#pragma once

#include <vector>

#include "nisqmaps/numerics.hpp"

namespace nisqmaps {

enum class Ladder { Up, Down };
enum class RotationOrder { YZ, ZY };

struct CircuitOptions {
    Ladder ladder = Ladder::Up;
    RotationOrder rot_order = RotationOrder::YZ;
};

/// Hardware-efficient ansatz: per block, R_y(phi_q) on every qubit, R_z(varphi_q)
/// on every qubit, then a CNOT ladder. angles holds 2n values per block
/// (phi_1..phi_n, then varphi_1..varphi_n).
struct CircuitSpec {
    int n = 1;
    int depth = 1;
    std::vector<double> angles;

    CircuitSpec() = default;
    CircuitSpec(int qubits, int blocks, std::vector<double> values);

    Index dim() const { return Index{1} << n; }
};

CircuitSpec sample_angles(int n, int depth, Seed seed);
CMat build_unitary(const CircuitSpec& spec, const CircuitOptions& opts = {});
/// U|0...0> without forming U.
CVec circuit_state(const CircuitSpec& spec, const CircuitOptions& opts = {});

std::vector<double> fidelity_samples(int n, int depth, std::size_t n_samples, Seed seed,
                                     const CircuitOptions& opts = {});
/// Draws F = 1 - u^{1/(d-1)}, which has density haar_fidelity_pdf.
std::vector<double> haar_fidelity_samples(Index d, std::size_t n_samples, Seed seed);
double haar_fidelity_pdf(Index d, double f);

std::vector<double> histogram(const std::vector<double>& samples, int bins);
/// KL(P || Q) of two count histograms after adding pseudo to every bin of both.
double kl_histograms(const std::vector<double>& p_counts, const std::vector<double>& q_counts,
                     double pseudo = 1.0);

enum class Baseline { Analytic, Sampled };

double expressibility(int n, int depth, std::size_t n_samples, int bins, Seed seed,
                      Baseline baseline = Baseline::Sampled, const CircuitOptions& opts = {});
/// The same statistic between two independent Haar fidelity sample sets.
double haar_reference_expressibility(Index d, std::size_t n_samples, int bins, Seed seed);

} // namespace nisqmaps
