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

#include "nisqmaps/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace nisqmaps {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::SizeMismatch: return "SizeMismatch";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::NotUnitary: return "NotUnitary";
        case ErrorCode::NotCP: return "NotCP";
        case ErrorCode::ZeroMatrix: return "ZeroMatrix";
        case ErrorCode::ZeroColumn: return "ZeroColumn";
        case ErrorCode::SingularD: return "SingularD";
        case ErrorCode::TooMany: return "TooMany";
        case ErrorCode::InvalidProbabilities: return "InvalidProbabilities";
        case ErrorCode::BadDataset: return "BadDataset";
        case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
        case ErrorCode::InvariantViolation: return "InvariantViolation";
        case ErrorCode::Io: return "Io";
        case ErrorCode::Parse: return "Parse";
    }
    return "Unknown";
}

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Seed derive_seed(Seed parent, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = mix64(parent.value);
    h = mix64(h ^ a);
    h = mix64(h ^ (b + 0x632be59bd9b4e019ULL));
    h = mix64(h ^ (c + 0x8cb92ba72f3d8dd7ULL));
    return Seed{h};
}

Seed derive_seed(Seed parent, std::string_view tag) {
    // FNV-1a over the tag, then mixed with the parent.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : tag) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return derive_seed(parent, h);
}

Rng::Rng(Seed seed) : engine_(mix64(seed.value)) {}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "Rng::below: empty range");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
}

CMat ginibre(Index m, Index n, Rng& rng) {
    if (m < 1 || n < 1) throw Error(ErrorCode::InvalidArgument, "ginibre: dimensions must be positive");
    CMat g(m, n);
    // Row-major fill so the stream order matches the documented layout.
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < n; ++j) {
            const double re = rng.normal();
            const double im = rng.normal();
            g(i, j) = cplx(re, im);
        }
    }
    return g;
}

CMat ginibre(Index m, Index n, Seed seed) {
    Rng rng(seed);
    return ginibre(m, n, rng);
}

QRResult qr_positive(const CMat& g) {
    const Index m = g.rows();
    const Index n = g.cols();
    if (n < 1 || m < n) {
        throw Error(ErrorCode::ShapeMismatch, "qr_positive: need rows >= cols >= 1");
    }
    Eigen::HouseholderQR<CMat> qr(g);
    CMat q = qr.householderQ() * CMat::Identity(m, n);
    CMat r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    const double scale = g.norm();
    for (Index k = 0; k < n; ++k) {
        const double mag = std::abs(r(k, k));
        if (!(mag > 1e-12 * scale)) {
            throw Error(ErrorCode::RankDeficient,
                        "qr_positive: diagonal " + std::to_string(k) + " of R below 1e-12 * ||G||");
        }
        const cplx phase = r(k, k) / mag;
        q.col(k) *= phase;
        r.row(k) *= std::conj(phase);
        r(k, k) = mag;
    }
    return {std::move(q), std::move(r)};
}

CMat haar_unitary(Index d, Seed seed) {
    return qr_positive(ginibre(d, d, seed)).q;
}

namespace {

void require_square(const CMat& m, const char* what) {
    if (m.rows() != m.cols()) {
        throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": matrix must be square");
    }
}

Index checked_subdim(Index n, Index d, const char* what) {
    if (d < 1 || n != d * d) {
        throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": expected a d^2 x d^2 matrix");
    }
    return d;
}

} // namespace

std::vector<EigenPair> eig_general(const CMat& m) {
    require_square(m, "eig_general");
    const lapack_int n = static_cast<lapack_int>(m.rows());
    std::vector<EigenPair> out;
    if (n == 0) return out;
    CMat a = m;
    std::vector<std::complex<double>> w(static_cast<std::size_t>(n));
    CMat vr(n, n);
    const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, a.data(), n, w.data(),
                                          nullptr, 1, vr.data(), n);
    if (info != 0) {
        throw Error(ErrorCode::NoConvergence, "eig_general: zgeev info=" + std::to_string(info));
    }
    out.reserve(w.size());
    for (lapack_int k = 0; k < n; ++k) {
        const CVec v = vr.col(k);
        const double res = (m * v - w[k] * v).norm() / v.norm();
        out.push_back({w[k], res});
    }
    return out;
}

std::vector<cplx> eigenvalues(const CMat& m) {
    require_square(m, "eigenvalues");
    const lapack_int n = static_cast<lapack_int>(m.rows());
    std::vector<cplx> w(static_cast<std::size_t>(n));
    if (n == 0) return w;
    CMat a = m;
    const lapack_int info =
        LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, w.data(), nullptr, 1, nullptr, 1);
    if (info != 0) {
        throw Error(ErrorCode::NoConvergence, "eigenvalues: zgeev info=" + std::to_string(info));
    }
    return w;
}

std::vector<cplx> eigenvalues(const RMat& m) {
    if (m.rows() != m.cols()) throw Error(ErrorCode::ShapeMismatch, "eigenvalues: matrix must be square");
    const lapack_int n = static_cast<lapack_int>(m.rows());
    std::vector<cplx> out(static_cast<std::size_t>(n));
    if (n == 0) return out;
    RMat a = m;
    std::vector<double> wr(static_cast<std::size_t>(n)), wi(static_cast<std::size_t>(n));
    const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, wr.data(),
                                          wi.data(), nullptr, 1, nullptr, 1);
    if (info != 0) {
        throw Error(ErrorCode::NoConvergence, "eigenvalues: dgeev info=" + std::to_string(info));
    }
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = cplx(wr[k], wi[k]);
    return out;
}

CMat kron(const CMat& a, const CMat& b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

CMat dagger(const CMat& a) { return a.adjoint(); }

CMat matmul(const CMat& a, const CMat& b) {
    if (a.cols() != b.rows()) throw Error(ErrorCode::ShapeMismatch, "matmul: inner dimensions differ");
    return a * b;
}

cplx trace(const CMat& a) {
    require_square(a, "trace");
    return a.trace();
}

CMat partial_trace_b(const CMat& m, Index d) {
    require_square(m, "partial_trace_b");
    checked_subdim(m.rows(), d, "partial_trace_b");
    CMat out = CMat::Zero(d, d);
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) {
            cplx acc = 0.0;
            for (Index k = 0; k < d; ++k) acc += m(i * d + k, j * d + k);
            out(i, j) = acc;
        }
    }
    return out;
}

CMat reshuffle(const CMat& m, Index d) {
    require_square(m, "reshuffle");
    checked_subdim(m.rows(), d, "reshuffle");
    // out[(p,q),(r,s)] = m[(s,q),(r,p)], pairs flattened as outer * d + inner.
    CMat out(m.rows(), m.cols());
    for (Index p = 0; p < d; ++p)
        for (Index q = 0; q < d; ++q)
            for (Index r = 0; r < d; ++r)
                for (Index s = 0; s < d; ++s) out(p * d + q, r * d + s) = m(s * d + q, r * d + p);
    return out;
}

CMat matrix_exp(const CMat& m) {
    require_square(m, "matrix_exp");
    CMat out = m.exp();
    if (!out.allFinite()) throw Error(ErrorCode::NoConvergence, "matrix_exp: non-finite result");
    return out;
}

CMat sqrtm_psd(const CMat& m) {
    require_square(m, "sqrtm_psd");
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(m));
    if (es.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "sqrtm_psd: eigensolver failed");
    const RVec roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * roots.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

CVec vec(const CMat& m) {
    return Eigen::Map<const CVec>(m.data(), m.size());
}

CMat unvec(const CVec& v, Index d) {
    if (v.size() != d * d) throw Error(ErrorCode::ShapeMismatch, "unvec: length is not d^2");
    return Eigen::Map<const CMat>(v.data(), d, d);
}

double max_abs(const CMat& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

CMat hermitian_part(const CMat& m) {
    return 0.5 * (m + m.adjoint());
}

bool is_unitary(const CMat& u, double tol) {
    if (u.rows() != u.cols()) return false;
    return max_abs(u.adjoint() * u - CMat::Identity(u.rows(), u.cols())) < tol;
}

} // namespace nisqmaps
