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

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "nisqmaps/error.hpp"

namespace nisqmaps {

using cplx = std::complex<double>;
using Index = Eigen::Index;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

/// Root of a reproducible random stream. Child streams are derived by
/// hashing, never by sharing generator state.
struct Seed {
    std::uint64_t value = 0;

    friend bool operator==(Seed, Seed) = default;
};

std::uint64_t mix64(std::uint64_t x);
Seed derive_seed(Seed parent, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);
Seed derive_seed(Seed parent, std::string_view tag);

/// Seeded generator. The uniform and normal transforms are spelled out here
/// (rather than taken from <random> distributions) so streams are identical
/// across standard library implementations.
class Rng {
public:
    explicit Rng(Seed seed);

    std::uint64_t next_u64() { return engine_(); }
    double uniform();                       // [0, 1)
    double normal();                        // standard normal
    std::uint64_t below(std::uint64_t n);   // uniform on [0, n)

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// m x n matrix with i.i.d. entries a + ib, a, b standard normal.
CMat ginibre(Index m, Index n, Seed seed);
CMat ginibre(Index m, Index n, Rng& rng);

struct QRResult {
    CMat q;  // m x n, orthonormal columns
    CMat r;  // n x n, upper triangular, real positive diagonal
};

/// Thin QR with the positive-diagonal convention that makes it unique.
QRResult qr_positive(const CMat& g);

CMat haar_unitary(Index d, Seed seed);

struct EigenPair {
    cplx value;
    double residual;  // ||M v - lambda v|| / ||v||
};

std::vector<EigenPair> eig_general(const CMat& m);
std::vector<cplx> eigenvalues(const CMat& m);
std::vector<cplx> eigenvalues(const RMat& m);

CMat kron(const CMat& a, const CMat& b);
CMat dagger(const CMat& a);
CMat matmul(const CMat& a, const CMat& b);
cplx trace(const CMat& a);

/// Trace over the second kron factor of a d^2 x d^2 matrix.
CMat partial_trace_b(const CMat& m, Index d);

/// Involutive index permutation between the Choi matrix
/// J = sum_ij E_ij (x) T(E_ij) and the column-stacking superoperator of T.
CMat reshuffle(const CMat& m, Index d);

CMat matrix_exp(const CMat& m);

/// Principal square root of a Hermitian PSD matrix (negative eigenvalues
/// from round-off are clipped).
CMat sqrtm_psd(const CMat& m);

/// Column-stacking vectorization and its inverse.
CVec vec(const CMat& m);
CMat unvec(const CVec& v, Index d);

double max_abs(const CMat& m);
CMat hermitian_part(const CMat& m);
bool is_unitary(const CMat& u, double tol);

} // namespace nisqmaps
