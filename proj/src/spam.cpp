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

#include "nisqmaps/spam.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nisqmaps {

namespace {

bool is_psd(const CMat& m, double tol) {
    if (max_abs(m - m.adjoint()) > tol) return false;
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol;
}

double trace_sqrt_psd(const CMat& m) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

RMat permutation_matrix(const std::vector<Index>& perm) {
    const Index d = static_cast<Index>(perm.size());
    RMat p = RMat::Zero(d, d);
    for (Index l = 0; l < d; ++l) p(perm[static_cast<std::size_t>(l)], l) = 1.0;
    return p;
}

} // namespace

SpamParams SpamParams::ideal(Index d) {
    SpamParams p;
    p.a_rho_re = RMat::Zero(d, d);
    p.a_rho_re(0, 0) = 1.0;
    p.a_rho_im = RMat::Zero(d, d);
    p.a_c = RMat::Identity(d, d);
    return p;
}

SpamParams SpamParams::from_vector(const std::vector<double>& omega, Index d) {
    if (static_cast<Index>(omega.size()) != 3 * d * d) {
        throw Error(ErrorCode::SizeMismatch, "SpamParams: expected 3 d^2 values");
    }
    SpamParams p;
    p.a_rho_re.resize(d, d);
    p.a_rho_im.resize(d, d);
    p.a_c.resize(d, d);
    std::size_t k = 0;
    for (RMat* m : {&p.a_rho_re, &p.a_rho_im, &p.a_c})
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j) (*m)(i, j) = omega[k++];
    return p;
}

std::vector<double> SpamParams::to_vector() const {
    const Index d = dim();
    std::vector<double> omega;
    omega.reserve(static_cast<std::size_t>(3 * d * d));
    for (const RMat* m : {&a_rho_re, &a_rho_im, &a_c})
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j) omega.push_back((*m)(i, j));
    return omega;
}

void PovmSet::validate(double tol) const {
    const Index d = dim();
    if (d == 0 || static_cast<Index>(elements.size()) != d) {
        throw Error(ErrorCode::InvariantViolation, "PovmSet: need exactly d elements");
    }
    CMat sum = CMat::Zero(d, d);
    for (const auto& e : elements) {
        if (e.rows() != d || e.cols() != d) throw Error(ErrorCode::ShapeMismatch, "PovmSet: element shape");
        if (!is_psd(e, tol)) throw Error(ErrorCode::InvariantViolation, "PovmSet: element not Hermitian PSD");
        sum += e;
    }
    if (max_abs(sum - CMat::Identity(d, d)) > tol) {
        throw Error(ErrorCode::InvariantViolation, "PovmSet: elements do not sum to I");
    }
}

PovmSet PovmSet::projective(Index d) {
    PovmSet p;
    for (Index j = 0; j < d; ++j) {
        CMat e = CMat::Zero(d, d);
        e(j, j) = 1.0;
        p.elements.push_back(std::move(e));
    }
    return p;
}

void SpamModel::validate(double tol) const {
    const Index d = dim();
    if (rho0.cols() != d || corruption.rows() != d || corruption.cols() != d) {
        throw Error(ErrorCode::ShapeMismatch, "SpamModel: inconsistent dimensions");
    }
    if (!is_psd(rho0, tol) || std::abs(trace(rho0) - 1.0) > tol) {
        throw Error(ErrorCode::InvariantViolation, "SpamModel: rho0 is not a density operator");
    }
    if (corruption.minCoeff() < 0.0) {
        throw Error(ErrorCode::InvariantViolation, "SpamModel: negative corruption entry");
    }
    if ((corruption.colwise().sum().array() - 1.0).abs().maxCoeff() > tol) {
        throw Error(ErrorCode::InvariantViolation, "SpamModel: corruption columns must sum to 1");
    }
    if (povm) {
        if (povm->dim() != d) throw Error(ErrorCode::ShapeMismatch, "SpamModel: POVM dimension");
        povm->validate(tol);
    }
}

SpamModel SpamModel::ideal(Index d) {
    SpamModel m;
    m.rho0 = CMat::Zero(d, d);
    m.rho0(0, 0) = 1.0;
    m.corruption = RMat::Identity(d, d);
    return m;
}

CMat params_to_state(const RMat& a_rho_re, const RMat& a_rho_im) {
    if (a_rho_re.rows() != a_rho_re.cols() || a_rho_re.rows() != a_rho_im.rows() ||
        a_rho_re.cols() != a_rho_im.cols()) {
        throw Error(ErrorCode::ShapeMismatch, "params_to_state: A_rho parts must be equal square matrices");
    }
    CMat a(a_rho_re.rows(), a_rho_re.cols());
    a.real() = a_rho_re;
    a.imag() = a_rho_im;
    const double t = a.squaredNorm();
    if (!(t > 0.0)) throw Error(ErrorCode::ZeroMatrix, "params_to_state: A_rho is zero");
    CMat rho = a * a.adjoint() / t;
    return hermitian_part(rho);
}

RMat params_to_corruption(const RMat& a_c) {
    if (a_c.rows() != a_c.cols()) throw Error(ErrorCode::ShapeMismatch, "params_to_corruption: a_c must be square");
    RMat c = a_c.cwiseAbs();
    for (Index l = 0; l < c.cols(); ++l) {
        const double s = c.col(l).sum();
        if (!(s > 0.0)) throw Error(ErrorCode::ZeroColumn, "params_to_corruption: all-zero column");
        c.col(l) /= s;
    }
    return c;
}

SpamModel params_to_spam(const SpamParams& p) {
    SpamModel m;
    m.rho0 = params_to_state(p.a_rho_re, p.a_rho_im);
    m.corruption = params_to_corruption(p.a_c);
    return m;
}

PovmSet povm_from_factors(const std::vector<CMat>& g) {
    if (g.empty()) throw Error(ErrorCode::InvalidArgument, "povm_from_factors: no factors");
    const Index d = g.front().rows();
    std::vector<CMat> h;
    CMat dsum = CMat::Zero(d, d);
    for (const auto& gj : g) {
        if (gj.rows() != d) throw Error(ErrorCode::ShapeMismatch, "povm_from_factors: factor shape");
        h.push_back(gj * gj.adjoint());
        dsum += h.back();
    }
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(dsum));
    const RVec& w = es.eigenvalues();
    if (!(w.minCoeff() > 1e-14 * std::max(1.0, w.maxCoeff()))) {
        throw Error(ErrorCode::SingularD, "povm_from_factors: normalizing matrix is singular");
    }
    const CMat& v = es.eigenvectors();
    const CMat inv_root = v * w.cwiseSqrt().cwiseInverse().cast<cplx>().asDiagonal() * v.adjoint();
    PovmSet povm;
    for (const auto& hj : h) povm.elements.push_back(hermitian_part(inv_root * hj * inv_root));
    return povm;
}

PovmSet povm_from_ginibre(Index d, Seed seed) {
    if (d < 2) throw Error(ErrorCode::InvalidArgument, "povm_from_ginibre: d >= 2 required");
    Rng rng(seed);
    std::vector<CMat> g;
    for (Index j = 0; j < d; ++j) g.push_back(ginibre(d, d, rng));
    return povm_from_factors(g);
}

RMat povm_to_corruption(const PovmSet& povm) {
    const Index d = povm.dim();
    RMat c(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index k = 0; k < d; ++k) c(i, k) = povm.elements[static_cast<std::size_t>(i)](k, k).real();
    return c;
}

double povm_fidelity(const PovmSet& truth, const PovmSet& candidate) {
    if (truth.dim() != candidate.dim() || truth.elements.size() != candidate.elements.size()) {
        throw Error(ErrorCode::ShapeMismatch, "povm_fidelity: POVM sizes differ");
    }
    const Index d = truth.dim();
    double total = 0.0;
    for (std::size_t j = 0; j < truth.elements.size(); ++j) {
        const CMat root = sqrtm_psd(truth.elements[j]);
        total += trace_sqrt_psd(root * candidate.elements[j] * root);
    }
    return total / static_cast<double>(d);
}

double corruption_fidelity(const RMat& truth, const RMat& candidate) {
    if (truth.rows() != candidate.rows() || truth.cols() != candidate.cols()) {
        throw Error(ErrorCode::ShapeMismatch, "corruption_fidelity: shapes differ");
    }
    const Index d = truth.rows();
    double total = 0.0;
    for (Index j = 0; j < d; ++j)
        for (Index k = 0; k < d; ++k) total += std::sqrt(std::max(0.0, truth(j, k) * candidate(j, k)));
    return total / static_cast<double>(d);
}

double state_fidelity(const CMat& a, const CMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorCode::ShapeMismatch, "state_fidelity: shapes differ");
    const CMat root = sqrtm_psd(a);
    const double f = trace_sqrt_psd(root * b * root);
    return f * f;
}

SpamModel synthetic_spam(Index d, double c1, double c2, Seed seed) {
    if (c1 < 0.0 || c1 > 1.0 || c2 < 0.0 || c2 > 1.0) {
        throw Error(ErrorCode::InvalidArgument, "synthetic_spam: c1, c2 must lie in [0, 1]");
    }
    const CMat g = ginibre(d, d, derive_seed(seed, 1));
    CMat drho = g * g.adjoint();
    drho /= trace(drho).real();
    const PovmSet noise = povm_from_ginibre(d, derive_seed(seed, 2));

    SpamModel m;
    m.rho0 = (1.0 - c1) * drho;
    m.rho0(0, 0) += c1;
    m.rho0 = hermitian_part(m.rho0);
    PovmSet povm;
    for (Index j = 0; j < d; ++j) {
        CMat e = (1.0 - c2) * noise.elements[static_cast<std::size_t>(j)];
        e(j, j) += c2;
        povm.elements.push_back(hermitian_part(e));
    }
    m.corruption = povm_to_corruption(povm);
    m.povm = std::move(povm);
    return m;
}

SpamModel permute_basis(const SpamModel& model, const std::vector<Index>& perm) {
    const Index d = model.dim();
    if (static_cast<Index>(perm.size()) != d) throw Error(ErrorCode::SizeMismatch, "permute_basis: perm length");
    const RMat p = permutation_matrix(perm);
    const CMat pc = p.cast<cplx>();
    SpamModel out;
    out.rho0 = pc * model.rho0 * pc.transpose();
    out.corruption = model.corruption * p.transpose();
    if (model.povm) {
        PovmSet povm;
        for (const auto& e : model.povm->elements) povm.elements.push_back(pc * e * pc.transpose());
        out.povm = std::move(povm);
    }
    return out;
}

double canonical_cost(const SpamModel& model) {
    const Index d = model.dim();
    CMat ideal = CMat::Zero(d, d);
    ideal(0, 0) = 1.0;
    return (model.rho0 - ideal).norm() + (model.corruption - RMat::Identity(d, d)).norm();
}

SpamModel canonicalize_spam(const SpamModel& model) {
    const Index d = model.dim();
    std::vector<Index> identity(static_cast<std::size_t>(d));
    std::iota(identity.begin(), identity.end(), Index{0});
    std::vector<Index> best = identity;
    double best_cost = canonical_cost(model);
    auto consider = [&](const std::vector<Index>& perm) {
        const double cost = canonical_cost(permute_basis(model, perm));
        if (cost < best_cost - 1e-15) {
            best_cost = cost;
            best = perm;
        }
    };

    if (d <= 8) {
        std::vector<Index> perm = identity;
        while (std::next_permutation(perm.begin(), perm.end())) consider(perm);
    } else {
        if ((d & (d - 1)) == 0) {
            for (Index mask = 1; mask < d; ++mask) {
                std::vector<Index> perm(static_cast<std::size_t>(d));
                for (Index l = 0; l < d; ++l) perm[static_cast<std::size_t>(l)] = l ^ mask;
                consider(perm);
            }
        }
        // greedy: repeatedly pin the largest remaining C(j, l) onto the diagonal
        std::vector<Index> perm(static_cast<std::size_t>(d), -1);
        std::vector<char> row_used(static_cast<std::size_t>(d), 0);
        for (Index step = 0; step < d; ++step) {
            double top = -1.0;
            Index bj = 0;
            Index bl = 0;
            for (Index l = 0; l < d; ++l) {
                if (perm[static_cast<std::size_t>(l)] >= 0) continue;
                for (Index j = 0; j < d; ++j) {
                    if (row_used[static_cast<std::size_t>(j)]) continue;
                    if (model.corruption(j, l) > top) {
                        top = model.corruption(j, l);
                        bj = j;
                        bl = l;
                    }
                }
            }
            perm[static_cast<std::size_t>(bl)] = bj;
            row_used[static_cast<std::size_t>(bj)] = 1;
        }
        consider(perm);
    }
    return permute_basis(model, best);
}

} // namespace nisqmaps
