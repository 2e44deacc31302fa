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

#include <functional>
#include <span>
#include <vector>

#include "nisqmaps/channels.hpp"
#include "nisqmaps/spam.hpp"
#include "nisqmaps/tomography.hpp"

namespace nisqmaps {

struct FitConfig {
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int max_iters = 5000;
    std::size_t batch_size = 0;  // 0 = full batch
    Seed seed{0};
    double init_scale = 0.1;
    int patience = 0;            // stop after this many iterations without a new best; 0 = never
    bool joint_spam = false;     // refine the corruption-model SPAM together with the map

    void validate() const;
};

struct FitReport {
    double initial_loss = 0.0;
    double final_loss = 0.0;     // loss of the returned (best) iterate
    std::vector<double> loss_trace;
    int iterations = 0;
    int best_iteration = 0;
    double wall_time = 0.0;      // seconds
    bool no_progress = false;
};

/// Adam on a loss with analytic gradient; returns the best iterate seen.
/// objective(x, grad, iteration) writes the gradient and returns the loss.
using Objective = std::function<double(const std::vector<double>&, std::vector<double>&, int)>;
std::pair<std::vector<double>, FitReport> adam_minimize(std::vector<double> x, const Objective& objective,
                                                         const FitConfig& cfg);

/// Precomputed quadratic tomography loss for one dataset and SPAM model.
class TomographyObjective {
public:
    TomographyObjective(const TomographyDataset& ds, const SpamModel& spam);

    Index dim() const { return d_; }
    std::size_t size() const { return static_cast<std::size_t>(freqs_.cols()); }
    const SpamModel& spam() const { return spam_; }

    double loss_superop(const CMat& superop) const;
    double loss(const ParamVector& theta) const;
    /// An empty subset means every mode.
    double loss_and_grad(const ParamVector& theta, std::vector<double>& grad,
                         std::span<const std::size_t> subset = {}) const;
    /// Map and corruption-model SPAM parameters together.
    double joint_loss_and_grad(const ParamVector& theta, const SpamParams& omega, std::vector<double>& grad_theta,
                               std::vector<double>& grad_omega, std::span<const std::size_t> subset = {}) const;
    /// Corruption-model SPAM parameters with the map fixed to the identity.
    double spam_loss_and_grad(const SpamParams& omega, std::vector<double>& grad) const;

private:
    struct Core {
        double loss = 0.0;
        CMat z;      // dL/dS (conjugate convention, d^2 x d^2)
        RMat c_bar;  // dL/dC
        CMat g_rho;  // dL/drho0 (Hermitian)
    };
    Core core(const CMat* superop, const CMat& sigma, const RMat& corruption, bool map_grad, bool spam_grad,
              std::span<const std::size_t> subset) const;
    CMat build_sigma(const CMat& rho0) const;

    Index d_ = 0;
    SpamModel spam_;
    RMat freqs_;                        // d x N
    CMat sigma_;                        // d^2 x N, vec(P_s rho0 P_s^dag)
    std::vector<std::size_t> basis_id_;
    std::vector<CMat> effects_;         // per basis, d x d^2
    std::vector<std::size_t> prep_id_;
    std::vector<CMat> preps_;
    RMat corruption_;                   // identity when POVM effects are baked in
    bool povm_ = false;
};

double loss(const ParamVector& theta, const SpamModel& spam, const TomographyDataset& ds);
std::vector<double> grad_loss(const ParamVector& theta, const SpamModel& spam, const TomographyDataset& ds);

/// d x d blocks of [I; 0; ...] + init_scale * Ginibre.
ParamVector initial_params(Index d, Index r, const FitConfig& cfg);

struct MapFit {
    KrausMap map;
    ParamVector params;
    SpamModel spam;  // equals the input unless cfg.joint_spam
    FitReport report;
};

MapFit fit_map(const TomographyDataset& ds, const SpamModel& spam, Index r, const FitConfig& cfg);

enum class SpamModelKind { Corruption, Povm };

struct SpamFit {
    SpamModel model;
    FitReport report;
    bool canonicalized = false;
};

/// Loss and gradient of the POVM-model calibration fit with the map fixed to
/// the identity. x packs A_rho (real part, then imaginary part, row-major)
/// followed by each factor G_j (real part, then imaginary part, row-major).
double povm_spam_loss_and_grad(const std::vector<double>& x, const TomographyDataset& ds_identity,
                               std::vector<double>& grad);

/// Calibration modes: every preparation, all-z basis.
std::vector<PauliMode> spam_calibration_modes(int n);
/// Quadratic loss of a SPAM model on calibration data (map = identity).
double spam_loss(const SpamModel& model, const TomographyDataset& ds);
SpamFit fit_spam(const TomographyDataset& ds_identity, const FitConfig& cfg, SpamModelKind kind);

/// sum_j f_j ln(f_j / p_j) after adding pseudo to every entry of both and renormalizing.
double kl_divergence(std::span<const double> f, std::span<const double> p, double pseudo = 0.0);
/// Mean KL over test modes with pseudo-mass 1/(2 N_s) (none for exact data).
double kl_eval(const KrausMap& map, const SpamModel& spam, const TomographyDataset& ds_test);
double kl_eval_superop(const CMat& superop, const SpamModel& spam, const TomographyDataset& ds_test);

} // namespace nisqmaps
