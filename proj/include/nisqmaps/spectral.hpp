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
#include <span>
#include <string>
#include <vector>

#include "nisqmaps/channels.hpp"
#include "nisqmaps/ensembles.hpp"

namespace nisqmaps {

/// Mean nearest-neighbour distance of the cloud; throws DegenerateSpectrum
/// when it is zero.
double kde_sigma(std::span<const cplx> points);
/// Same, over the eigenvalues after the leading one.
double kde_sigma(const Spectrum& spec);

/// Squared L2 distance between Gaussian KDEs (width sigma) of two equally
/// sized clouds, evaluated in closed form with pair kernels of width sqrt2 sigma.
double spectral_distance(std::span<const cplx> a, std::span<const cplx> b, double sigma);
/// Leading eigenvalue excluded on both sides.
double spectral_distance(const Spectrum& a, const Spectrum& b, double sigma);

/// Optimal-assignment 2-Wasserstein distance between equally weighted,
/// equally sized clouds.
double wasserstein2(std::span<const cplx> a, std::span<const cplx> b);

enum class FitMetric { SpectralDistance, Wasserstein2 };

/// Spectra (leading eigenvalue dropped) of m_samples diluted unitaries per
/// grid cell; the k-th sample of cell (i, j) uses derive_seed(seed, i, j, k).
class DUSpectrumBank {
public:
    DUSpectrumBank(Index d, std::vector<double> grid_p, std::vector<Index> grid_r, int m_samples, Seed seed);

    Index dim() const { return d_; }
    const std::vector<double>& grid_p() const { return grid_p_; }
    const std::vector<Index>& grid_r() const { return grid_r_; }
    int samples() const { return m_; }
    Seed seed() const { return seed_; }
    const std::vector<cplx>& tail(std::size_t ip, std::size_t jr, int k) const;

private:
    Index d_;
    std::vector<double> grid_p_;
    std::vector<Index> grid_r_;
    int m_;
    Seed seed_;
    std::vector<std::vector<cplx>> tails_;
};

struct DUFit {
    double p_star = 0.0;
    Index r_star = 1;
    double sd_star = 0.0;
    double sigma = 0.0;
    int samples_per_point = 1;
    std::vector<double> grid_p;
    std::vector<Index> grid_r;
    std::vector<std::vector<double>> scores;  // [ip][jr], mean distance
    FitMetric metric = FitMetric::SpectralDistance;
};

std::vector<double> default_grid_p();
std::vector<Index> default_grid_r(Index d);

/// sigma defaults to kde_sigma(spec). Ties go to the smaller r, then the smaller p.
DUFit fit_du(const Spectrum& spec, const DUSpectrumBank& bank, std::optional<double> sigma = std::nullopt,
             FitMetric metric = FitMetric::SpectralDistance);
DUFit fit_du(const Spectrum& spec, Index d, const std::vector<double>& grid_p, const std::vector<Index>& grid_r,
             int m_samples, Seed seed, FitMetric metric = FitMetric::SpectralDistance);

enum class SupportShape { Annulus, Disc };

SupportShape classify_support(const DUFit& fit);
std::string to_string(SupportShape shape);

struct EmpiricalRadii {
    double min_mod = 0.0;
    double max_mod = 0.0;
};

EmpiricalRadii radii_empirical(const Spectrum& spec);

} // namespace nisqmaps
