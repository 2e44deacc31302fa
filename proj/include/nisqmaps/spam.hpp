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
#include <vector>

#include "nisqmaps/numerics.hpp"

namespace nisqmaps {

/// Raw SPAM parameters: A_rho = a_rho_re + i a_rho_im and the corruption
/// generator a_c, each d x d. Flattened as re, im, c (row-major each).
struct SpamParams {
    RMat a_rho_re;
    RMat a_rho_im;
    RMat a_c;

    Index dim() const { return a_c.rows(); }

    static SpamParams ideal(Index d);
    static SpamParams from_vector(const std::vector<double>& omega, Index d);
    std::vector<double> to_vector() const;
};

/// Measurement operators E_0..E_{d-1}.
struct PovmSet {
    std::vector<CMat> elements;

    static constexpr double kTolerance = 1e-10;

    Index dim() const { return elements.empty() ? 0 : elements.front().rows(); }
    /// Throws InvariantViolation unless every element is Hermitian PSD and
    /// they sum to I (both within tol).
    void validate(double tol = kTolerance) const;

    static PovmSet projective(Index d);
};

struct SpamModel {
    CMat rho0;
    RMat corruption;              // C(j, l) = Pr(report j | basis state l)
    std::optional<PovmSet> povm;  // when present, takes precedence over corruption

    static constexpr double kTolerance = 1e-10;

    Index dim() const { return rho0.rows(); }
    void validate(double tol = kTolerance) const;

    static SpamModel ideal(Index d);
};

CMat params_to_state(const RMat& a_rho_re, const RMat& a_rho_im);
RMat params_to_corruption(const RMat& a_c);
SpamModel params_to_spam(const SpamParams& p);

/// E_j = D^{-1/2} G_j G_j^dag D^{-1/2}, D = sum_j G_j G_j^dag.
PovmSet povm_from_factors(const std::vector<CMat>& g);
PovmSet povm_from_ginibre(Index d, Seed seed);
RMat povm_to_corruption(const PovmSet& povm);

/// (1/d) sum_j Tr sqrt(sqrt(E_true) E_j sqrt(E_true)).
double povm_fidelity(const PovmSet& truth, const PovmSet& candidate);
/// Same functional applied to the diagonal POVMs of two corruption matrices.
double corruption_fidelity(const RMat& truth, const RMat& candidate);
/// (Tr sqrt(sqrt(a) b sqrt(a)))^2, the Uhlmann fidelity of two states.
double state_fidelity(const CMat& a, const CMat& b);

SpamModel synthetic_spam(Index d, double c1, double c2, Seed seed);

/// Relabels the computational basis (rho0 -> P rho0 P^T, C -> C P^T,
/// E_j -> P E_j P^T) to minimize ||rho0 - |0><0|||_F + ||C - I||_F.
SpamModel canonicalize_spam(const SpamModel& model);
/// perm[l] is the new label of basis state l.
SpamModel permute_basis(const SpamModel& model, const std::vector<Index>& perm);
double canonical_cost(const SpamModel& model);

} // namespace nisqmaps
