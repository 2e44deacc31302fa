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

#include "nisqmaps/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <set>

#include "nisqmaps/parallel.hpp"

namespace nisqmaps {

namespace {

Eigen::Matrix2cd gate_h() {
    const double h = 1.0 / std::numbers::sqrt2;
    Eigen::Matrix2cd m;
    m << h, h, h, -h;
    return m;
}

Eigen::Matrix2cd gate_x() {
    Eigen::Matrix2cd m;
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

Eigen::Matrix2cd gate_s() {
    Eigen::Matrix2cd m;
    m << 1.0, 0.0, 0.0, cplx(0.0, 1.0);
    return m;
}

Eigen::Matrix2cd prep_gate(PrepState s) {
    switch (s) {
    case PrepState::PlusZ: return Eigen::Matrix2cd::Identity();
    case PrepState::MinusZ: return gate_x();
    case PrepState::PlusX: return gate_h();
    case PrepState::MinusX: return gate_h() * gate_x();
    case PrepState::PlusY: return gate_s() * gate_h();
    case PrepState::MinusY: return gate_s() * gate_h() * gate_x();
    }
    throw Error(ErrorCode::InvalidArgument, "prep_gate: bad state");
}

Eigen::Matrix2cd meas_gate(Axis b) {
    switch (b) {
    case Axis::Z: return Eigen::Matrix2cd::Identity();
    case Axis::X: return gate_h();
    case Axis::Y: return gate_h() * gate_s().adjoint();
    }
    throw Error(ErrorCode::InvalidArgument, "meas_gate: bad axis");
}

constexpr std::string_view kPrepNames[6] = {"+x", "-x", "+y", "-y", "+z", "-z"};
constexpr char kAxisNames[3] = {'x', 'y', 'z'};

std::vector<double> checked_probs(std::vector<double> p) {
    double total = 0.0;
    for (double& v : p) {
        if (!(v >= -1e-9 && v <= 1.0 + 1e-9)) {
            throw Error(ErrorCode::InvalidProbabilities, "truth probability outside [0, 1]: " + std::to_string(v));
        }
        v = std::clamp(v, 0.0, 1.0);
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-8) {
        throw Error(ErrorCode::InvalidProbabilities, "truth probabilities do not sum to 1");
    }
    for (double& v : p) v /= total;
    return p;
}

TomographyDataset simulate(const std::function<CMat(const CMat&)>& channel, const SpamModel& spam,
                           const std::vector<PauliMode>& modes, std::uint64_t shots, Seed seed) {
    if (shots < 1) throw Error(ErrorCode::InvalidArgument, "simulate_frequencies: N_s >= 1 required");
    if (modes.empty()) throw Error(ErrorCode::InvalidArgument, "simulate_frequencies: no modes");
    TomographyDataset ds;
    ds.n = modes.front().n();
    ds.shots = shots;
    ds.records.resize(modes.size());
    const Index d = ds.dim();
    if (spam.dim() != d) throw Error(ErrorCode::ShapeMismatch, "simulate_frequencies: SPAM dimension");
    parallel_for(modes.size(), [&](std::size_t m) {
        const PauliMode& mode = modes[m];
        const CMat ps = prep_unitary(mode.prep);
        const CMat evolved = channel(ps * spam.rho0 * ps.adjoint());
        const std::vector<double> p = checked_probs(measure_probs(evolved, spam, mode));
        std::vector<double> cdf(p.size());
        std::partial_sum(p.begin(), p.end(), cdf.begin());
        std::vector<std::uint64_t> counts(p.size(), 0);
        Rng rng(derive_seed(seed, mode.index()));
        for (std::uint64_t s = 0; s < shots; ++s) {
            const double u = rng.uniform() * cdf.back();
            auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            std::size_t k = static_cast<std::size_t>(it - cdf.begin());
            if (k >= p.size()) k = p.size() - 1;
            while (p[k] == 0.0 && k > 0) --k;  // never report an impossible outcome
            ++counts[k];
        }
        std::vector<double> freqs(p.size());
        for (std::size_t k = 0; k < p.size(); ++k) {
            freqs[k] = static_cast<double>(counts[k]) / static_cast<double>(shots);
        }
        ds.records[m] = TomographyRecord{mode, std::move(freqs)};
    });
    return ds;
}

} // namespace

std::uint64_t PauliMode::index() const {
    std::uint64_t idx = 0;
    for (int q = 0; q < n(); ++q) {
        idx = idx * 18 + 3 * static_cast<std::uint64_t>(prep[static_cast<std::size_t>(q)]) +
              static_cast<std::uint64_t>(basis[static_cast<std::size_t>(q)]);
    }
    return idx;
}

PauliMode PauliMode::from_index(std::uint64_t index, int n) {
    if (n < 1 || index >= mode_count(n)) throw Error(ErrorCode::InvalidArgument, "PauliMode: index out of range");
    PauliMode m;
    m.prep.resize(static_cast<std::size_t>(n));
    m.basis.resize(static_cast<std::size_t>(n));
    for (int q = n - 1; q >= 0; --q) {
        const std::uint64_t digit = index % 18;
        index /= 18;
        m.prep[static_cast<std::size_t>(q)] = static_cast<PrepState>(digit / 3);
        m.basis[static_cast<std::size_t>(q)] = static_cast<Axis>(digit % 3);
    }
    return m;
}

std::string PauliMode::prep_string() const {
    std::string s;
    for (PrepState p : prep) s += kPrepNames[static_cast<int>(p)];
    return s;
}

std::string PauliMode::basis_string() const {
    std::string s;
    for (Axis a : basis) s += kAxisNames[static_cast<int>(a)];
    return s;
}

PauliMode PauliMode::parse(std::string_view prep, std::string_view basis) {
    if (prep.size() != 2 * basis.size() || basis.empty()) {
        throw Error(ErrorCode::Parse, "PauliMode: prep and basis lengths disagree");
    }
    PauliMode m;
    for (std::size_t q = 0; q < basis.size(); ++q) {
        const std::string_view token = prep.substr(2 * q, 2);
        auto it = std::find(std::begin(kPrepNames), std::end(kPrepNames), token);
        if (it == std::end(kPrepNames)) throw Error(ErrorCode::Parse, "PauliMode: bad preparation token");
        m.prep.push_back(static_cast<PrepState>(it - std::begin(kPrepNames)));
        const char* a = std::find(std::begin(kAxisNames), std::end(kAxisNames), basis[q]);
        if (a == std::end(kAxisNames)) throw Error(ErrorCode::Parse, "PauliMode: bad basis letter");
        m.basis.push_back(static_cast<Axis>(a - std::begin(kAxisNames)));
    }
    return m;
}

std::uint64_t mode_count(int n) {
    if (n < 1 || n > 15) throw Error(ErrorCode::InvalidArgument, "mode_count: n out of range");
    std::uint64_t c = 1;
    for (int q = 0; q < n; ++q) c *= 18;
    return c;
}

std::vector<PauliMode> sample_modes(int n, std::uint64_t n_modes, Seed seed) {
    const std::uint64_t total = mode_count(n);
    if (n_modes > total) throw Error(ErrorCode::TooMany, "sample_modes: more modes requested than exist");
    // Floyd's algorithm: a uniform n_modes-subset with n_modes draws
    Rng rng(seed);
    std::set<std::uint64_t> chosen;
    for (std::uint64_t j = total - n_modes; j < total; ++j) {
        const std::uint64_t t = rng.below(j + 1);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    std::vector<PauliMode> modes;
    modes.reserve(chosen.size());
    for (std::uint64_t idx : chosen) modes.push_back(PauliMode::from_index(idx, n));
    return modes;
}

std::vector<PauliMode> all_modes(int n) {
    std::vector<PauliMode> modes;
    for (std::uint64_t idx = 0; idx < mode_count(n); ++idx) modes.push_back(PauliMode::from_index(idx, n));
    return modes;
}

CMat prep_unitary(const std::vector<PrepState>& prep) {
    CMat u = CMat::Identity(1, 1);
    for (PrepState s : prep) u = kron(u, prep_gate(s));
    return u;
}

CMat meas_unitary(const std::vector<Axis>& basis) {
    CMat u = CMat::Identity(1, 1);
    for (Axis b : basis) u = kron(u, meas_gate(b));
    return u;
}

std::vector<double> measure_probs(const CMat& evolved, const SpamModel& spam, const PauliMode& mode) {
    const Index d = spam.dim();
    if (evolved.rows() != d || (Index{1} << mode.n()) != d) {
        throw Error(ErrorCode::ShapeMismatch, "measure_probs: dimensions disagree");
    }
    const CMat pb = meas_unitary(mode.basis);
    const CMat rotated = pb * evolved * pb.adjoint();
    std::vector<double> p(static_cast<std::size_t>(d), 0.0);
    if (spam.povm) {
        for (Index j = 0; j < d; ++j) {
            p[static_cast<std::size_t>(j)] =
                (spam.povm->elements[static_cast<std::size_t>(j)].cwiseProduct(rotated.transpose())).sum().real();
        }
    } else {
        const RVec diag = rotated.diagonal().real();
        const RVec out = spam.corruption * diag;
        for (Index j = 0; j < d; ++j) p[static_cast<std::size_t>(j)] = out(j);
    }
    return p;
}

std::vector<double> predict_probs(const KrausMap& map, const SpamModel& spam, const PauliMode& mode) {
    if (map.dim() != spam.dim()) throw Error(ErrorCode::ShapeMismatch, "predict_probs: map and SPAM dimensions differ");
    const CMat ps = prep_unitary(mode.prep);
    if (ps.rows() != map.dim()) throw Error(ErrorCode::ShapeMismatch, "predict_probs: mode size differs from map");
    return measure_probs(nisqmaps::apply(map, CMat(ps * spam.rho0 * ps.adjoint())), spam, mode);
}

std::vector<double> predict_probs_superop(const CMat& superop, const SpamModel& spam, const PauliMode& mode) {
    const Index d = spam.dim();
    if (superop.rows() != d * d) throw Error(ErrorCode::ShapeMismatch, "predict_probs: superoperator size");
    const CMat ps = prep_unitary(mode.prep);
    if (ps.rows() != d) throw Error(ErrorCode::ShapeMismatch, "predict_probs: mode size differs from map");
    return measure_probs(unvec(superop * vec(ps * spam.rho0 * ps.adjoint()), d), spam, mode);
}

void TomographyDataset::validate() const {
    const Index d = dim();
    for (const auto& rec : records) {
        if (rec.mode.n() != n || static_cast<Index>(rec.freqs.size()) != d) {
            throw Error(ErrorCode::BadDataset, "dataset record has the wrong size");
        }
        double total = 0.0;
        for (double f : rec.freqs) {
            if (f < 0.0) throw Error(ErrorCode::BadDataset, "dataset frequency is negative");
            const double counts = f * static_cast<double>(shots);
            if (shots > 0 && std::abs(counts - std::round(counts)) > 1e-6) {
                throw Error(ErrorCode::BadDataset, "dataset frequency is not a multiple of 1/N_s");
            }
            total += f;
        }
        if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::BadDataset, "dataset frequencies do not sum to 1");
    }
}

TomographyDataset simulate_frequencies(const KrausMap& truth, const SpamModel& spam,
                                       const std::vector<PauliMode>& modes, std::uint64_t shots, Seed seed) {
    return simulate([&](const CMat& rho) { return nisqmaps::apply(truth, rho); }, spam, modes, shots, seed);
}

TomographyDataset simulate_frequencies_superop(const CMat& superop, const SpamModel& spam,
                                               const std::vector<PauliMode>& modes, std::uint64_t shots,
                                               Seed seed) {
    const Index d = spam.dim();
    if (superop.rows() != d * d || superop.cols() != d * d) {
        throw Error(ErrorCode::ShapeMismatch, "simulate_frequencies: superoperator size");
    }
    return simulate([&](const CMat& rho) { return CMat(unvec(superop * vec(rho), d)); }, spam, modes, shots, seed);
}

TomographyDataset exact_dataset(const KrausMap& truth, const SpamModel& spam, const std::vector<PauliMode>& modes) {
    if (modes.empty()) throw Error(ErrorCode::InvalidArgument, "exact_dataset: no modes");
    TomographyDataset ds;
    ds.n = modes.front().n();
    ds.shots = 0;
    ds.records.resize(modes.size());
    parallel_for(modes.size(), [&](std::size_t m) {
        ds.records[m] = TomographyRecord{modes[m], checked_probs(predict_probs(truth, spam, modes[m]))};
    });
    return ds;
}

std::pair<TomographyDataset, TomographyDataset> split(const TomographyDataset& ds, double train_fraction, Seed seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "split: fraction must lie in (0, 1)");
    }
    const std::size_t total = ds.records.size();
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = total; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(order[i - 1], order[j]);
    }
    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(total)));
    std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::sort(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    TomographyDataset train{ds.n, ds.shots, {}};
    TomographyDataset test{ds.n, ds.shots, {}};
    for (std::size_t i = 0; i < total; ++i) {
        (i < n_train ? train : test).records.push_back(ds.records[order[i]]);
    }
    return {std::move(train), std::move(test)};
}

} // namespace nisqmaps
