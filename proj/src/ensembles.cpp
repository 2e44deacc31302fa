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

#include "nisqmaps/ensembles.hpp"

#include <cmath>

namespace nisqmaps {

namespace {

struct DUDraw {
    CMat u;
    KrausMap dissipator;
};

DUDraw draw_du(const DUParams& params, Seed seed) {
    params.validate();
    return DUDraw{haar_unitary(params.d, derive_seed(seed, "unitary")),
                  params_to_kraus(ParamVector::random(params.d, params.r, derive_seed(seed, "kraus")))};
}

} // namespace

void LindbladParams::validate() const {
    if (d < 1) throw Error(ErrorCode::InvalidArgument, "LindbladParams: d >= 1 required");
    if (rank < 1 || rank > d * d) throw Error(ErrorCode::InvalidArgument, "LindbladParams: rank must lie in [1, d^2]");
    if (!(alpha >= 0.0) || !(beta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "LindbladParams: alpha, beta >= 0");
}

CMat lindbladian(const CMat& h, const CMat& phi, double alpha) {
    const Index d = h.rows();
    if (h.cols() != d || phi.rows() != d * d || phi.cols() != d * d) {
        throw Error(ErrorCode::ShapeMismatch, "lindbladian: H must be d x d and phi d^2 x d^2");
    }
    const CMat id = CMat::Identity(d, d);
    const cplx i(0.0, 1.0);
    const CMat m = partial_trace_b(phi, d).transpose();
    return -i * alpha * (kron(id, h) - kron(h.transpose(), id)) + reshuffle(phi, d) -
           0.5 * (kron(m.transpose(), id) + kron(id, m));
}

CMat random_lindbladian(const LindbladParams& params) {
    params.validate();
    const CMat gh = ginibre(params.d, params.d, derive_seed(params.seed, "hamiltonian"));
    const CMat h = 0.5 * (gh + gh.adjoint());
    const CMat gphi = ginibre(params.d * params.d, params.rank, derive_seed(params.seed, "dissipator"));
    return lindbladian(h, gphi * gphi.adjoint(), params.alpha);
}

LindbladMap lindblad_map(const CMat& generator, double beta, Index d) {
    if (generator.rows() != d * d || generator.cols() != d * d) {
        throw Error(ErrorCode::ShapeMismatch, "lindblad_map: generator must be d^2 x d^2");
    }
    if (!(beta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lindblad_map: beta >= 0 required");
    CMat s = matrix_exp(beta * generator);
    KrausMap kraus = kraus_from_superop(s, d, 1e-6);
    return LindbladMap{std::move(s), std::move(kraus)};
}

void DUParams::validate() const {
    if (d < 1) throw Error(ErrorCode::InvalidArgument, "DUParams: d >= 1 required");
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "DUParams: p must lie in [0, 1]");
    if (r < 1 || r > d * d) throw Error(ErrorCode::InvalidArgument, "DUParams: r must lie in [1, d^2]");
}

KrausMap sample_diluted_unitary(const DUParams& params, Seed seed) {
    DUDraw draw = draw_du(params, seed);
    std::vector<CMat> kraus;
    if (params.p < 1.0) kraus.push_back(std::sqrt(1.0 - params.p) * draw.u);
    if (params.p > 0.0) {
        for (const auto& k : draw.dissipator.kraus()) kraus.push_back(std::sqrt(params.p) * k);
    }
    const Index d = params.d;
    if (static_cast<Index>(kraus.size()) > d * d) {
        CMat s = CMat::Zero(d * d, d * d);
        for (const auto& k : kraus) s += kron(k.conjugate(), k);
        return kraus_from_superop(s, d);
    }
    return KrausMap(std::move(kraus));
}

CMat diluted_unitary_superop(const DUParams& params, Seed seed) {
    const DUDraw draw = draw_du(params, seed);
    return (1.0 - params.p) * kron(draw.u.conjugate(), draw.u) + params.p * to_superop(draw.dissipator);
}

DURadii du_radii(double p, Index r) {
    if (!(p >= 0.0 && p <= 1.0) || r < 1) throw Error(ErrorCode::InvalidArgument, "du_radii: need p in [0, 1], r >= 1");
    const double a = (1.0 - p) * (1.0 - p);
    const double b = p * p / static_cast<double>(r);
    DURadii out;
    out.r_plus = std::sqrt(a + b);
    if (a >= b) out.r_minus = std::sqrt(a - b);
    return out;
}

bool du_is_disc(double p, Index r) {
    return (1.0 - p) * (1.0 - p) < p * p / static_cast<double>(r);
}

} // namespace nisqmaps
