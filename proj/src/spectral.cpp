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

#include "nisqmaps/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nisqmaps/parallel.hpp"

namespace nisqmaps {

namespace {

// sum_ij N(x_i; y_j, s) for the isotropic 2-D Gaussian density
double kernel_sum(std::span<const cplx> x, std::span<const cplx> y, double s) {
    const double inv = 1.0 / (2.0 * s * s);
    double total = 0.0;
    for (const cplx& xi : x) {
        double row = 0.0;
        for (const cplx& yj : y) row += std::exp(-std::norm(xi - yj) * inv);
        total += row;
    }
    return total * inv / std::numbers::pi;
}

// Hungarian algorithm (potentials form), cost is n x n row-major.
double assignment_cost(const std::vector<double>& cost, std::size_t n) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    double total = 0.0;
    for (std::size_t j = 1; j <= n; ++j) total += cost[(p[j] - 1) * n + (j - 1)];
    return total;
}

double cloud_distance(std::span<const cplx> a, std::span<const cplx> b, double sigma, FitMetric metric) {
    return metric == FitMetric::SpectralDistance ? spectral_distance(a, b, sigma) : wasserstein2(a, b);
}

} // namespace

double kde_sigma(std::span<const cplx> points) {
    if (points.size() < 2) throw Error(ErrorCode::InvalidArgument, "kde_sigma: need at least two points");
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (j != i) best = std::min(best, std::abs(points[i] - points[j]));
        }
        total += best;
    }
    const double sigma = total / static_cast<double>(points.size());
    if (!(sigma > 0.0)) throw Error(ErrorCode::DegenerateSpectrum, "kde_sigma: all nearest-neighbour distances vanish");
    return sigma;
}

double kde_sigma(const Spectrum& spec) {
    return kde_sigma(spec.tail());
}

double spectral_distance(std::span<const cplx> a, std::span<const cplx> b, double sigma) {
    if (a.size() != b.size()) throw Error(ErrorCode::SizeMismatch, "spectral_distance: clouds differ in size");
    if (a.empty()) throw Error(ErrorCode::SizeMismatch, "spectral_distance: empty clouds");
    if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "spectral_distance: sigma must be > 0");
    const double s = std::numbers::sqrt2 * sigma;
    const double n = static_cast<double>(a.size());
    const double value = (kernel_sum(a, a, s) + kernel_sum(b, b, s) - 2.0 * kernel_sum(a, b, s)) / (n * n);
    return std::max(value, 0.0);
}

double spectral_distance(const Spectrum& a, const Spectrum& b, double sigma) {
    return spectral_distance(a.tail(), b.tail(), sigma);
}

double wasserstein2(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.size() != b.size() || a.empty()) throw Error(ErrorCode::SizeMismatch, "wasserstein2: clouds differ in size");
    const std::size_t n = a.size();
    std::vector<double> cost(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = std::norm(a[i] - b[j]);
    return std::sqrt(std::max(assignment_cost(cost, n), 0.0) / static_cast<double>(n));
}

DUSpectrumBank::DUSpectrumBank(Index d, std::vector<double> grid_p, std::vector<Index> grid_r, int m_samples,
                               Seed seed)
    : d_(d), grid_p_(std::move(grid_p)), grid_r_(std::move(grid_r)), m_(m_samples), seed_(seed) {
    if (grid_p_.empty() || grid_r_.empty()) throw Error(ErrorCode::InvalidArgument, "DU bank: empty grid");
    if (m_ < 1) throw Error(ErrorCode::InvalidArgument, "DU bank: m_samples >= 1 required");
    for (double p : grid_p_) DUParams{d_, p, 1}.validate();
    for (Index r : grid_r_) DUParams{d_, 0.5, r}.validate();
    const std::size_t np = grid_p_.size();
    const std::size_t nr = grid_r_.size();
    const auto m = static_cast<std::size_t>(m_);
    tails_.resize(np * nr * m);
    parallel_for(tails_.size(), [&](std::size_t idx) {
        const std::size_t ip = idx / (nr * m);
        const std::size_t jr = (idx / m) % nr;
        const std::size_t k = idx % m;
        const DUParams params{d_, grid_p_[ip], grid_r_[jr]};
        const Spectrum spec = spectrum_of_superop(diluted_unitary_superop(params, derive_seed(seed_, ip, jr, k)), d_);
        tails_[idx].assign(spec.tail().begin(), spec.tail().end());
    });
}

const std::vector<cplx>& DUSpectrumBank::tail(std::size_t ip, std::size_t jr, int k) const {
    const auto m = static_cast<std::size_t>(m_);
    return tails_.at((ip * grid_r_.size() + jr) * m + static_cast<std::size_t>(k));
}

std::vector<double> default_grid_p() {
    std::vector<double> grid;
    for (int k = 1; k <= 49; ++k) grid.push_back(k / 50.0);
    return grid;
}

std::vector<Index> default_grid_r(Index d) {
    std::vector<Index> grid;
    for (Index r = 1; r <= d * d; ++r) grid.push_back(r);
    return grid;
}

DUFit fit_du(const Spectrum& spec, const DUSpectrumBank& bank, std::optional<double> sigma, FitMetric metric) {
    const Index d = bank.dim();
    if (static_cast<Index>(spec.size()) != d * d) {
        throw Error(ErrorCode::SizeMismatch, "fit_du: spectrum size does not match d^2");
    }
    DUFit fit;
    fit.sigma = sigma ? *sigma : kde_sigma(spec);
    if (!(fit.sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "fit_du: sigma must be > 0");
    fit.samples_per_point = bank.samples();
    fit.grid_p = bank.grid_p();
    fit.grid_r = bank.grid_r();
    fit.metric = metric;
    const std::size_t np = fit.grid_p.size();
    const std::size_t nr = fit.grid_r.size();
    fit.scores.assign(np, std::vector<double>(nr, 0.0));
    const auto target = spec.tail();
    parallel_for(np * nr, [&](std::size_t idx) {
        const std::size_t ip = idx / nr;
        const std::size_t jr = idx % nr;
        double total = 0.0;
        for (int k = 0; k < bank.samples(); ++k) total += cloud_distance(target, bank.tail(ip, jr, k), fit.sigma, metric);
        fit.scores[ip][jr] = total / bank.samples();
    });
    fit.sd_star = std::numeric_limits<double>::infinity();
    for (std::size_t jr = 0; jr < nr; ++jr) {
        for (std::size_t ip = 0; ip < np; ++ip) {
            if (fit.scores[ip][jr] < fit.sd_star) {
                fit.sd_star = fit.scores[ip][jr];
                fit.p_star = fit.grid_p[ip];
                fit.r_star = fit.grid_r[jr];
            }
        }
    }
    return fit;
}

DUFit fit_du(const Spectrum& spec, Index d, const std::vector<double>& grid_p, const std::vector<Index>& grid_r,
             int m_samples, Seed seed, FitMetric metric) {
    const DUSpectrumBank bank(d, grid_p, grid_r, m_samples, seed);
    return fit_du(spec, bank, std::nullopt, metric);
}

SupportShape classify_support(const DUFit& fit) {
    return du_is_disc(fit.p_star, fit.r_star) ? SupportShape::Disc : SupportShape::Annulus;
}

std::string to_string(SupportShape shape) {
    return shape == SupportShape::Disc ? "disc" : "annulus";
}

EmpiricalRadii radii_empirical(const Spectrum& spec) {
    const auto tail = spec.tail();
    if (tail.empty()) throw Error(ErrorCode::InvalidArgument, "radii_empirical: need at least two eigenvalues");
    EmpiricalRadii out{std::numeric_limits<double>::infinity(), 0.0};
    for (const cplx& v : tail) {
        out.min_mod = std::min(out.min_mod, std::abs(v));
        out.max_mod = std::max(out.max_mod, std::abs(v));
    }
    return out;
}

} // namespace nisqmaps
