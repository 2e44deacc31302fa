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

#include "nisqmaps/channels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace nisqmaps {

KrausMap::KrausMap(std::vector<CMat> kraus, double tol) : kraus_(std::move(kraus)) {
    if (kraus_.empty()) throw Error(ErrorCode::InvalidArgument, "KrausMap: empty Kraus set");
    dim_ = kraus_.front().rows();
    for (const auto& k : kraus_) {
        if (k.rows() != dim_ || k.cols() != dim_) {
            throw Error(ErrorCode::ShapeMismatch, "KrausMap: Kraus operators must all be d x d");
        }
    }
    if (rank() > dim_ * dim_) {
        throw Error(ErrorCode::InvalidArgument, "KrausMap: rank exceeds d^2");
    }
    const double defect = trace_defect();
    if (!(defect < tol)) {
        throw Error(ErrorCode::InvariantViolation,
                    "KrausMap: not trace preserving (defect " + std::to_string(defect) + ")");
    }
}

KrausMap KrausMap::identity(Index d) {
    return KrausMap({CMat::Identity(d, d)});
}

double KrausMap::trace_defect() const {
    CMat acc = -CMat::Identity(dim_, dim_);
    for (const auto& k : kraus_) acc.noalias() += k.adjoint() * k;
    return max_abs(acc);
}

ParamVector::ParamVector(Index d, Index r, std::vector<double> values)
    : dim(d), rank(r), theta(std::move(values)) {
    if (d < 1 || r < 1 || r > d * d) {
        throw Error(ErrorCode::InvalidArgument, "ParamVector: need d >= 1 and 1 <= r <= d^2");
    }
    if (static_cast<Index>(theta.size()) != 2 * r * d * d) {
        throw Error(ErrorCode::SizeMismatch, "ParamVector: length must be 2 r d^2");
    }
}

ParamVector ParamVector::from_matrix(const CMat& g, Index d) {
    if (g.cols() != d || g.rows() % d != 0) {
        throw Error(ErrorCode::ShapeMismatch, "ParamVector::from_matrix: G must be rd x d");
    }
    const Index r = g.rows() / d;
    const Index half = r * d * d;
    std::vector<double> theta(static_cast<std::size_t>(2 * half));
    for (Index row = 0; row < g.rows(); ++row) {
        for (Index col = 0; col < d; ++col) {
            const Index k = row * d + col;
            theta[static_cast<std::size_t>(k)] = g(row, col).real();
            theta[static_cast<std::size_t>(half + k)] = g(row, col).imag();
        }
    }
    return ParamVector(d, r, std::move(theta));
}

ParamVector ParamVector::random(Index d, Index r, Seed seed) {
    return from_matrix(ginibre(r * d, d, seed), d);
}

CMat ParamVector::to_matrix() const {
    const Index half = rank * dim * dim;
    CMat g(rank * dim, dim);
    for (Index row = 0; row < rank * dim; ++row) {
        for (Index col = 0; col < dim; ++col) {
            const Index k = row * dim + col;
            g(row, col) = cplx(theta[static_cast<std::size_t>(k)],
                               theta[static_cast<std::size_t>(half + k)]);
        }
    }
    return g;
}

void sort_spectrum_values(std::vector<cplx>& values) {
    if (values.empty()) return;
    auto lead = std::min_element(values.begin(), values.end(), [](cplx a, cplx b) {
        return std::abs(a - 1.0) < std::abs(b - 1.0);
    });
    std::iter_swap(values.begin(), lead);
    std::sort(values.begin() + 1, values.end(), [](cplx a, cplx b) {
        const double ma = std::abs(a);
        const double mb = std::abs(b);
        if (ma != mb) return ma > mb;
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
}

bool is_conjugation_closed(std::span<const cplx> values, double tol) {
    std::vector<char> used(values.size(), 0);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (used[i]) continue;
        used[i] = 1;
        if (std::abs(values[i].imag()) <= tol) continue;
        const cplx target = std::conj(values[i]);
        std::size_t best = values.size();
        double best_dist = tol;
        for (std::size_t j = 0; j < values.size(); ++j) {
            if (used[j]) continue;
            const double dist = std::abs(values[j] - target);
            if (dist <= best_dist) {
                best_dist = dist;
                best = j;
            }
        }
        if (best == values.size()) return false;
        used[best] = 1;
    }
    return true;
}

Spectrum Spectrum::from_eigenvalues(std::vector<cplx> eigenvalues) {
    if (eigenvalues.empty()) throw Error(ErrorCode::InvariantViolation, "Spectrum: no eigenvalues");
    sort_spectrum_values(eigenvalues);
    if (std::abs(eigenvalues.front() - 1.0) > kUnitTolerance) {
        throw Error(ErrorCode::InvariantViolation, "Spectrum: eigenvalue 1 missing");
    }
    for (const cplx& v : eigenvalues) {
        if (std::abs(v) > 1.0 + kModulusSlack) {
            throw Error(ErrorCode::InvariantViolation, "Spectrum: eigenvalue outside the unit disc");
        }
    }
    if (!is_conjugation_closed(eigenvalues, kPairTolerance)) {
        throw Error(ErrorCode::InvariantViolation, "Spectrum: not closed under conjugation");
    }
    return Spectrum{std::move(eigenvalues)};
}

std::span<const cplx> Spectrum::tail() const {
    if (values.empty()) return {};
    return std::span<const cplx>(values).subspan(1);
}

KrausMap params_to_kraus(const ParamVector& p) {
    const QRResult qr = qr_positive(p.to_matrix());
    std::vector<CMat> kraus;
    kraus.reserve(static_cast<std::size_t>(p.rank));
    for (Index s = 0; s < p.rank; ++s) kraus.push_back(qr.q.middleRows(s * p.dim, p.dim));
    return KrausMap(std::move(kraus));
}

CMat apply(const KrausMap& map, const CMat& rho) {
    if (rho.rows() != map.dim() || rho.cols() != map.dim()) {
        throw Error(ErrorCode::ShapeMismatch, "apply: state dimension does not match the map");
    }
    CMat out = CMat::Zero(map.dim(), map.dim());
    for (const auto& k : map.kraus()) out.noalias() += k * rho * k.adjoint();
    return out;
}

CMat to_superop(const KrausMap& map) {
    const Index d = map.dim();
    CMat s = CMat::Zero(d * d, d * d);
    for (const auto& k : map.kraus()) {
        const CMat kc = k.conjugate();
        for (Index b = 0; b < d; ++b)
            for (Index j = 0; j < d; ++j) s.block(b * d, j * d, d, d).noalias() += kc(b, j) * k;
    }
    return s;
}

CMat to_choi(const KrausMap& map) {
    const Index d = map.dim();
    CMat j = CMat::Zero(d * d, d * d);
    for (const auto& k : map.kraus()) {
        const CVec v = vec(k);
        j.noalias() += v * v.adjoint();
    }
    return j;
}

RMat superop_real_form(const CMat& superop, Index d) {
    const Index n = d * d;
    if (superop.rows() != n || superop.cols() != n) {
        throw Error(ErrorCode::ShapeMismatch, "superop_real_form: expected d^2 x d^2");
    }
    struct Term {
        Index index;
        cplx coeff;
    };
    struct Element {
        Term terms[2];
        int count;
    };
    const double h = 1.0 / std::numbers::sqrt2;
    std::vector<Element> basis;
    basis.reserve(static_cast<std::size_t>(n));
    // vec index of E_ij under column stacking is i + d * j
    for (Index i = 0; i < d; ++i) basis.push_back({{{i + d * i, 1.0}, {0, 0.0}}, 1});
    for (Index i = 0; i < d; ++i) {
        for (Index j = i + 1; j < d; ++j) {
            basis.push_back({{{i + d * j, h}, {j + d * i, h}}, 2});
            basis.push_back({{{i + d * j, cplx(0.0, h)}, {j + d * i, cplx(0.0, -h)}}, 2});
        }
    }
    CMat sv(n, n);
    for (Index a = 0; a < n; ++a) {
        const Element& e = basis[static_cast<std::size_t>(a)];
        sv.col(a) = e.terms[0].coeff * superop.col(e.terms[0].index);
        if (e.count == 2) sv.col(a) += e.terms[1].coeff * superop.col(e.terms[1].index);
    }
    RMat out(n, n);
    for (Index a = 0; a < n; ++a) {
        const Element& e = basis[static_cast<std::size_t>(a)];
        Eigen::RowVectorXcd row = std::conj(e.terms[0].coeff) * sv.row(e.terms[0].index);
        if (e.count == 2) row += std::conj(e.terms[1].coeff) * sv.row(e.terms[1].index);
        out.row(a) = row.real();
    }
    return out;
}

Spectrum spectrum_of_superop(const CMat& superop, Index d) {
    return Spectrum::from_eigenvalues(eigenvalues(superop_real_form(superop, d)));
}

Spectrum spectrum(const KrausMap& map) {
    return spectrum_of_superop(to_superop(map), map.dim());
}

KrausMap kraus_from_choi(const CMat& choi, Index d, double negative_floor) {
    if (choi.rows() != d * d || choi.cols() != d * d) {
        throw Error(ErrorCode::ShapeMismatch, "kraus_from_choi: expected d^2 x d^2");
    }
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(choi));
    if (es.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "kraus_from_choi: eigensolver failed");
    const RVec& lambda = es.eigenvalues();
    if (lambda.minCoeff() < -negative_floor) {
        throw Error(ErrorCode::NotCP, "kraus_from_choi: Choi eigenvalue " + std::to_string(lambda.minCoeff()));
    }
    const double cutoff = 1e-13 * std::max(1.0, lambda.maxCoeff());
    std::vector<CMat> kraus;
    for (Index k = lambda.size() - 1; k >= 0; --k) {
        if (lambda(k) <= cutoff) continue;
        kraus.push_back(std::sqrt(lambda(k)) * unvec(es.eigenvectors().col(k), d));
    }
    if (kraus.empty()) throw Error(ErrorCode::NotCP, "kraus_from_choi: zero Choi matrix");
    CMat norm = CMat::Zero(d, d);
    for (const auto& k : kraus) norm.noalias() += k.adjoint() * k;
    Eigen::SelfAdjointEigenSolver<CMat> ns(hermitian_part(norm));
    const RVec inv_root = ns.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    const CMat correction = ns.eigenvectors() * inv_root.cast<cplx>().asDiagonal() * ns.eigenvectors().adjoint();
    for (auto& k : kraus) k = k * correction;
    return KrausMap(std::move(kraus));
}

KrausMap kraus_from_superop(const CMat& superop, Index d, double negative_floor) {
    return kraus_from_choi(reshuffle(superop, d), d, negative_floor);
}

KrausMap compose(const KrausMap& first, const KrausMap& second) {
    if (first.dim() != second.dim()) throw Error(ErrorCode::ShapeMismatch, "compose: dimensions differ");
    const Index d = first.dim();
    if (first.rank() * second.rank() > d * d) {
        return kraus_from_superop(to_superop(second) * to_superop(first), d);
    }
    std::vector<CMat> kraus;
    kraus.reserve(static_cast<std::size_t>(first.rank() * second.rank()));
    for (const auto& k2 : second.kraus())
        for (const auto& k1 : first.kraus()) kraus.push_back(k2 * k1);
    return KrausMap(std::move(kraus));
}

KrausMap unitary_channel(const CMat& u) {
    if (!is_unitary(u, 1e-10)) throw Error(ErrorCode::NotUnitary, "unitary_channel: U^dag U != I");
    return KrausMap({u});
}

} // namespace nisqmaps
