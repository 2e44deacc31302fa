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

#include <optional>

#include "nisqmaps/channels.hpp"

namespace nisqmaps {

struct LindbladParams {
    Index d = 2;
    Index rank = 1;
    double alpha = 1.0;  // Hamiltonian weight
    double beta = 0.1;   // map strength, used by lindblad_map
    Seed seed{0};

    void validate() const;
};

/// L = -i alpha (I (x) H - H^T (x) I) + reshuffle(phi) - 1/2 (M^T (x) I + I (x) M)
/// with H = (G_H + G_H^dag)/2, phi = G_phi G_phi^dag (G_phi d^2 x r Ginibre) and
/// M = Tr_B(phi)^T = sum_k L_k^dag L_k. Independent of beta.
CMat random_lindbladian(const LindbladParams& params);

/// Generator with the given Hamiltonian and Choi-form dissipator.
CMat lindbladian(const CMat& h, const CMat& phi, double alpha);

struct LindbladMap {
    CMat superop;
    KrausMap kraus;
};

LindbladMap lindblad_map(const CMat& generator, double beta, Index d);

struct DUParams {
    Index d = 2;
    double p = 0.5;
    Index r = 1;

    void validate() const;
};

/// Kraus set {sqrt(1-p) U} u {sqrt(p) K_j}, U Haar, {K_j} a rank-r channel
/// from the QR construction. Compressed through the Choi form above d^2.
KrausMap sample_diluted_unitary(const DUParams& params, Seed seed);
/// (1-p) conj(U) (x) U + p sum_j conj(K_j) (x) K_j for the same draw.
CMat diluted_unitary_superop(const DUParams& params, Seed seed);

struct DURadii {
    std::optional<double> r_minus;  // empty in the disc regime
    double r_plus = 1.0;
};

DURadii du_radii(double p, Index r);
/// (1-p)^2 < p^2 / r
bool du_is_disc(double p, Index r);

} // namespace nisqmaps
