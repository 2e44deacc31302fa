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

#include <span>
#include <vector>

#include "nisqmaps/numerics.hpp"

namespace nisqmaps {

/// Trace-preserving map rho -> sum_s K_s rho K_s^dagger on a d-dimensional
/// Hilbert space. Construction checks ||sum K^dag K - I||_max < tol.
class KrausMap {
public:
    static constexpr double kTraceTolerance = 1e-10;

    explicit KrausMap(std::vector<CMat> kraus, double tol = kTraceTolerance);

    static KrausMap identity(Index d);

    Index dim() const { return dim_; }
    Index rank() const { return static_cast<Index>(kraus_.size()); }
    const std::vector<CMat>& kraus() const { return kraus_; }

    /// max |(sum K^dag K - I)_ij|
    double trace_defect() const;

private:
    Index dim_ = 0;
    std::vector<CMat> kraus_;
};

/// 2 r d^2 reals: real parts of the row-major rd x d matrix G, then the
/// imaginary parts in the same order. This layout is part of the file format.
struct ParamVector {
    Index dim = 0;
    Index rank = 0;
    std::vector<double> theta;

    ParamVector() = default;
    ParamVector(Index d, Index r, std::vector<double> values);

    static ParamVector from_matrix(const CMat& g, Index d);
    static ParamVector random(Index d, Index r, Seed seed);

    CMat to_matrix() const;
};

/// Superoperator eigenvalues. The eigenvalue closest to 1 comes first; the
/// rest are ordered by modulus, then real part, then imaginary part (all
/// descending).
struct Spectrum {
    std::vector<cplx> values;

    static constexpr double kUnitTolerance = 1e-8;
    static constexpr double kPairTolerance = 1e-8;
    static constexpr double kModulusSlack = 1e-6;

    /// Sorts and enforces the invariants (leading 1, conjugation closure,
    /// moduli <= 1 + 1e-6). Throws InvariantViolation otherwise.
    static Spectrum from_eigenvalues(std::vector<cplx> eigenvalues);

    std::size_t size() const { return values.size(); }
    /// All eigenvalues except the leading one.
    std::span<const cplx> tail() const;
};

void sort_spectrum_values(std::vector<cplx>& values);
bool is_conjugation_closed(std::span<const cplx> values, double tol);

KrausMap params_to_kraus(const ParamVector& p);
CMat apply(const KrausMap& map, const CMat& rho);
CMat to_superop(const KrausMap& map);
/// J = sum_ij E_ij (x) T(E_ij); reshuffle(J) == to_superop.
CMat to_choi(const KrausMap& map);

/// Real matrix of a Hermiticity-preserving superoperator in the orthonormal
/// basis {E_ii, (E_ij + E_ji)/sqrt2, i(E_ij - E_ji)/sqrt2}. Similar to the
/// input, so it has the same eigenvalues.
RMat superop_real_form(const CMat& superop, Index d);

Spectrum spectrum(const KrausMap& map);
Spectrum spectrum_of_superop(const CMat& superop, Index d);

/// Kraus operators from a Choi matrix via its eigendecomposition.
/// Eigenvalues below -negative_floor raise NotCP; the rest below zero are
/// clipped. The result is re-normalized to be exactly trace preserving.
KrausMap kraus_from_choi(const CMat& choi, Index d, double negative_floor = 1e-6);
KrausMap kraus_from_superop(const CMat& superop, Index d, double negative_floor = 1e-6);

/// second o first. Ranks above d^2 are compressed through the Choi form.
KrausMap compose(const KrausMap& first, const KrausMap& second);

KrausMap unitary_channel(const CMat& u);

} // namespace nisqmaps
