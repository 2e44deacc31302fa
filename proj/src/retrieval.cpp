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

#include "nisqmaps/retrieval.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

namespace nisqmaps {

namespace {

std::size_t basis_index(const PauliMode& mode) {
    std::size_t idx = 0;
    for (Axis a : mode.basis) idx = idx * 3 + static_cast<std::size_t>(a);
    return idx;
}

std::size_t prep_index(const PauliMode& mode) {
    std::size_t idx = 0;
    for (PrepState s : mode.prep) idx = idx * 6 + static_cast<std::size_t>(s);
    return idx;
}

// Kmat(a d + i, k) = K_k(a, i) where K_k is the k-th d x d block of Q.
CMat kraus_matrix(const CMat& q, Index d, Index r) {
    CMat kmat(d * d, r);
    for (Index k = 0; k < r; ++k)
        for (Index a = 0; a < d; ++a)
            for (Index i = 0; i < d; ++i) kmat(a * d + i, k) = q(k * d + a, i);
    return kmat;
}

// S(b d + a, j d + i) = sum_k conj(K_k(b, j)) K_k(a, i)
CMat superop_from_kmat(const CMat& kmat, Index d) {
    const CMat sr = kmat.conjugate() * kmat.transpose();
    CMat s(d * d, d * d);
    for (Index b = 0; b < d; ++b)
        for (Index j = 0; j < d; ++j)
            for (Index a = 0; a < d; ++a)
                for (Index i = 0; i < d; ++i) s(b * d + a, j * d + i) = sr(b * d + j, a * d + i);
    return s;
}

// Pulls dL/dS back through the Kraus stacking and the QR map onto theta.
std::vector<double> theta_gradient(const CMat& z, const CMat& kmat, const QRResult& qr, Index d, Index r) {
    CMat zr(d * d, d * d);
    for (Index x = 0; x < d; ++x)
        for (Index y = 0; y < d; ++y)
            for (Index a = 0; a < d; ++a)
                for (Index i = 0; i < d; ++i) zr(x * d + y, a * d + i) = z(x * d + a, y * d + i);
    const CMat x1 = zr * kmat;
    CMat qbar(r * d, d);
    for (Index k = 0; k < r; ++k)
        for (Index x = 0; x < d; ++x)
            for (Index y = 0; y < d; ++y) qbar(k * d + x, y) = 2.0 * x1(x * d + y, k);

    const CMat b = qr.q.adjoint() * qbar;
    CMat w = CMat::Zero(d, d);
    for (Index i = 0; i < d; ++i) {
        w(i, i) = cplx(0.0, b(i, i).imag());
        for (Index j = 0; j < i; ++j) w(i, j) = b(i, j) - std::conj(b(j, i));
    }
    const CMat m = qbar + qr.q * (w - b);
    const CMat gbar = qr.r.triangularView<Eigen::Upper>().solve(m.adjoint()).adjoint();

    const Index half = r * d * d;
    std::vector<double> grad(static_cast<std::size_t>(2 * half));
    for (Index row = 0; row < r * d; ++row) {
        for (Index col = 0; col < d; ++col) {
            const Index k = row * d + col;
            grad[static_cast<std::size_t>(k)] = gbar(row, col).real();
            grad[static_cast<std::size_t>(half + k)] = gbar(row, col).imag();
        }
    }
    return grad;
}

// Gradient of the state part (A_rho) given dL/drho0 = g_rho.
void state_gradient(const RMat& a_re, const RMat& a_im, const CMat& g_rho, RMat& out_re, RMat& out_im) {
    CMat a(a_re.rows(), a_re.cols());
    a.real() = a_re;
    a.imag() = a_im;
    const double t = a.squaredNorm();
    const CMat rho = a * a.adjoint() / t;
    const double c = (g_rho * rho).trace().real();
    const CMat abar = 2.0 * (g_rho * a - c * a) / t;
    out_re = abar.real();
    out_im = abar.imag();
}

RMat corruption_gradient(const RMat& a_c, const RMat& c_bar) {
    const RMat c = params_to_corruption(a_c);
    RMat out(a_c.rows(), a_c.cols());
    for (Index l = 0; l < a_c.cols(); ++l) {
        const double s = a_c.col(l).cwiseAbs().sum();
        const double shift = c_bar.col(l).dot(c.col(l));
        for (Index k = 0; k < a_c.rows(); ++k) {
            const double sign = a_c(k, l) > 0.0 ? 1.0 : (a_c(k, l) < 0.0 ? -1.0 : 0.0);
            out(k, l) = sign / s * (c_bar(k, l) - shift);
        }
    }
    return out;
}

std::vector<double> flatten_rows(std::initializer_list<const RMat*> mats) {
    std::vector<double> out;
    for (const RMat* m : mats)
        for (Index i = 0; i < m->rows(); ++i)
            for (Index j = 0; j < m->cols(); ++j) out.push_back((*m)(i, j));
    return out;
}

std::vector<std::size_t> sample_batch(std::size_t total, std::size_t size, Seed seed) {
    Rng rng(seed);
    std::set<std::size_t> chosen;
    for (std::size_t j = total - size; j < total; ++j) {
        const auto t = static_cast<std::size_t>(rng.below(j + 1));
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    return {chosen.begin(), chosen.end()};
}

void require_calibration_data(const TomographyDataset& ds) {
    if (ds.records.empty()) throw Error(ErrorCode::BadDataset, "fit_spam: empty dataset");
    for (const auto& rec : ds.records) {
        for (Axis a : rec.mode.basis) {
            if (a != Axis::Z) throw Error(ErrorCode::BadDataset, "fit_spam: calibration modes must use the all-z basis");
        }
    }
}

} // namespace

void FitConfig::validate() const {
    if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "FitConfig: learning rate must be > 0");
    if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "FitConfig: Adam betas must lie in (0, 1)");
    }
    if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "FitConfig: epsilon must be > 0");
    if (max_iters < 1) throw Error(ErrorCode::InvalidArgument, "FitConfig: max_iters must be >= 1");
    if (!(init_scale >= 0.0)) throw Error(ErrorCode::InvalidArgument, "FitConfig: init_scale must be >= 0");
    if (patience < 0) throw Error(ErrorCode::InvalidArgument, "FitConfig: patience must be >= 0");
}

std::pair<std::vector<double>, FitReport> adam_minimize(std::vector<double> x, const Objective& objective,
                                                         const FitConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    FitReport report;
    std::vector<double> m(x.size(), 0.0);
    std::vector<double> v(x.size(), 0.0);
    std::vector<double> grad(x.size(), 0.0);
    std::vector<double> best = x;
    double best_loss = std::numeric_limits<double>::infinity();
    int since_best = 0;
    double b1t = 1.0;
    double b2t = 1.0;
    for (int it = 0; it < cfg.max_iters; ++it) {
        const double value = objective(x, grad, it);
        if (!std::isfinite(value)) throw Error(ErrorCode::NoConvergence, "adam: loss is not finite");
        report.loss_trace.push_back(value);
        if (it == 0) report.initial_loss = value;
        if (value < best_loss) {
            if (value < best_loss - 1e-12 * std::abs(best_loss)) since_best = 0;
            best_loss = value;
            best = x;
            report.best_iteration = it;
        } else {
            ++since_best;
        }
        if (cfg.patience > 0 && since_best >= cfg.patience) break;

        b1t *= cfg.beta1;
        b2t *= cfg.beta2;
        for (std::size_t i = 0; i < x.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
            const double mhat = m[i] / (1.0 - b1t);
            const double vhat = v[i] / (1.0 - b2t);
            x[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
        }
    }
    report.iterations = static_cast<int>(report.loss_trace.size());
    report.final_loss = best_loss;
    report.no_progress = report.initial_loss > 1e-14 && !(best_loss < report.initial_loss);
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(best), std::move(report)};
}

TomographyObjective::TomographyObjective(const TomographyDataset& ds, const SpamModel& spam) : spam_(spam) {
    d_ = ds.dim();
    if (spam.dim() != d_) throw Error(ErrorCode::ShapeMismatch, "objective: SPAM and dataset dimensions differ");
    if (ds.records.empty()) throw Error(ErrorCode::BadDataset, "objective: empty dataset");
    const Index n_modes = static_cast<Index>(ds.records.size());
    freqs_.resize(d_, n_modes);
    povm_ = spam.povm.has_value();
    corruption_ = povm_ ? RMat::Identity(d_, d_) : spam.corruption;

    std::unordered_map<std::size_t, std::size_t> basis_slot;
    std::unordered_map<std::size_t, std::size_t> prep_slot;
    for (Index m = 0; m < n_modes; ++m) {
        const auto& rec = ds.records[static_cast<std::size_t>(m)];
        if (rec.mode.n() != ds.n || static_cast<Index>(rec.freqs.size()) != d_) {
            throw Error(ErrorCode::BadDataset, "objective: record size does not match the dataset");
        }
        for (Index j = 0; j < d_; ++j) freqs_(j, m) = rec.freqs[static_cast<std::size_t>(j)];

        auto [bit, bnew] = basis_slot.try_emplace(basis_index(rec.mode), effects_.size());
        if (bnew) {
            const CMat pb = meas_unitary(rec.mode.basis);
            CMat eff(d_, d_ * d_);
            if (povm_) {
                for (Index j = 0; j < d_; ++j) {
                    const CMat e = pb.adjoint() * spam.povm->elements[static_cast<std::size_t>(j)] * pb;
                    for (Index x = 0; x < d_; ++x)
                        for (Index y = 0; y < d_; ++y) eff(j, x + d_ * y) = e(y, x);
                }
            } else {
                for (Index l = 0; l < d_; ++l)
                    for (Index x = 0; x < d_; ++x)
                        for (Index y = 0; y < d_; ++y) eff(l, x + d_ * y) = pb(l, x) * std::conj(pb(l, y));
            }
            effects_.push_back(std::move(eff));
        }
        basis_id_.push_back(bit->second);

        auto [pit, pnew] = prep_slot.try_emplace(prep_index(rec.mode), preps_.size());
        if (pnew) preps_.push_back(prep_unitary(rec.mode.prep));
        prep_id_.push_back(pit->second);
    }
    sigma_ = build_sigma(spam.rho0);
}

CMat TomographyObjective::build_sigma(const CMat& rho0) const {
    CMat sigma(d_ * d_, static_cast<Index>(prep_id_.size()));
    std::vector<CVec> cache(preps_.size());
    for (std::size_t k = 0; k < preps_.size(); ++k) cache[k] = vec(preps_[k] * rho0 * preps_[k].adjoint());
    for (std::size_t m = 0; m < prep_id_.size(); ++m) sigma.col(static_cast<Index>(m)) = cache[prep_id_[m]];
    return sigma;
}

TomographyObjective::Core TomographyObjective::core(const CMat* superop, const CMat& sigma, const RMat& corruption,
                                                    bool map_grad, bool spam_grad,
                                                    std::span<const std::size_t> subset) const {
    const bool all = subset.empty();
    const Index count = all ? static_cast<Index>(size()) : static_cast<Index>(subset.size());
    auto mode_at = [&](Index t) { return all ? static_cast<std::size_t>(t) : subset[static_cast<std::size_t>(t)]; };

    CMat gathered;
    const CMat* sig = &sigma;
    if (!all) {
        gathered.resize(sigma.rows(), count);
        for (Index t = 0; t < count; ++t) gathered.col(t) = sigma.col(static_cast<Index>(mode_at(t)));
        sig = &gathered;
    }
    const CMat omega = superop ? CMat((*superop) * (*sig)) : *sig;

    Core out;
    out.loss = 0.0;
    const bool any_grad = map_grad || spam_grad;
    CMat y;
    if (any_grad) y.resize(d_ * d_, count);
    if (spam_grad) out.c_bar = RMat::Zero(d_, d_);
    for (Index t = 0; t < count; ++t) {
        const std::size_t m = mode_at(t);
        const CMat& eff = effects_[basis_id_[m]];
        const RVec pi = (eff * omega.col(t)).real();
        const RVec diff = corruption * pi - freqs_.col(static_cast<Index>(m));
        out.loss += diff.squaredNorm();
        if (!any_grad) continue;
        const RVec gp = 2.0 * diff;
        const RVec pibar = corruption.transpose() * gp;
        y.col(t) = eff.transpose() * pibar.cast<cplx>();
        if (spam_grad) out.c_bar.noalias() += gp * pi.transpose();
    }
    if (map_grad) out.z = y * sig->transpose();
    if (spam_grad) {
        const CMat sy = superop ? CMat(superop->transpose() * y) : y;
        out.g_rho = CMat::Zero(d_, d_);
        for (Index t = 0; t < count; ++t) {
            const CMat& p = preps_[prep_id_[mode_at(t)]];
            out.g_rho.noalias() += p.adjoint() * unvec(sy.col(t), d_).transpose() * p;
        }
        out.g_rho = hermitian_part(out.g_rho);
    }
    return out;
}

double TomographyObjective::loss_superop(const CMat& superop) const {
    if (superop.rows() != d_ * d_ || superop.cols() != d_ * d_) {
        throw Error(ErrorCode::ShapeMismatch, "loss: superoperator size does not match the dataset");
    }
    return core(&superop, sigma_, corruption_, false, false, {}).loss;
}

double TomographyObjective::loss(const ParamVector& theta) const {
    if (theta.dim != d_) throw Error(ErrorCode::ShapeMismatch, "loss: parameter dimension does not match the dataset");
    const QRResult qr = qr_positive(theta.to_matrix());
    const CMat s = superop_from_kmat(kraus_matrix(qr.q, d_, theta.rank), d_);
    return core(&s, sigma_, corruption_, false, false, {}).loss;
}

double TomographyObjective::loss_and_grad(const ParamVector& theta, std::vector<double>& grad,
                                          std::span<const std::size_t> subset) const {
    if (theta.dim != d_) throw Error(ErrorCode::ShapeMismatch, "loss: parameter dimension does not match the dataset");
    const QRResult qr = qr_positive(theta.to_matrix());
    const CMat kmat = kraus_matrix(qr.q, d_, theta.rank);
    const CMat s = superop_from_kmat(kmat, d_);
    const Core c = core(&s, sigma_, corruption_, true, false, subset);
    grad = theta_gradient(c.z, kmat, qr, d_, theta.rank);
    return c.loss;
}

double TomographyObjective::joint_loss_and_grad(const ParamVector& theta, const SpamParams& omega,
                                                std::vector<double>& grad_theta, std::vector<double>& grad_omega,
                                                std::span<const std::size_t> subset) const {
    if (povm_) throw Error(ErrorCode::InvalidArgument, "joint fit supports the corruption-matrix model only");
    if (theta.dim != d_ || omega.dim() != d_) throw Error(ErrorCode::ShapeMismatch, "joint loss: dimensions differ");
    const QRResult qr = qr_positive(theta.to_matrix());
    const CMat kmat = kraus_matrix(qr.q, d_, theta.rank);
    const CMat s = superop_from_kmat(kmat, d_);
    const CMat sigma = build_sigma(params_to_state(omega.a_rho_re, omega.a_rho_im));
    const Core c = core(&s, sigma, params_to_corruption(omega.a_c), true, true, subset);
    grad_theta = theta_gradient(c.z, kmat, qr, d_, theta.rank);
    RMat g_re;
    RMat g_im;
    state_gradient(omega.a_rho_re, omega.a_rho_im, c.g_rho, g_re, g_im);
    const RMat g_c = corruption_gradient(omega.a_c, c.c_bar);
    grad_omega = flatten_rows({&g_re, &g_im, &g_c});
    return c.loss;
}

double TomographyObjective::spam_loss_and_grad(const SpamParams& omega, std::vector<double>& grad) const {
    if (omega.dim() != d_) throw Error(ErrorCode::ShapeMismatch, "spam loss: dimensions differ");
    const CMat sigma = build_sigma(params_to_state(omega.a_rho_re, omega.a_rho_im));
    const Core c = core(nullptr, sigma, params_to_corruption(omega.a_c), false, true, {});
    RMat g_re;
    RMat g_im;
    state_gradient(omega.a_rho_re, omega.a_rho_im, c.g_rho, g_re, g_im);
    const RMat g_c = corruption_gradient(omega.a_c, c.c_bar);
    grad = flatten_rows({&g_re, &g_im, &g_c});
    return c.loss;
}

double loss(const ParamVector& theta, const SpamModel& spam, const TomographyDataset& ds) {
    return TomographyObjective(ds, spam).loss(theta);
}

std::vector<double> grad_loss(const ParamVector& theta, const SpamModel& spam, const TomographyDataset& ds) {
    std::vector<double> grad;
    TomographyObjective(ds, spam).loss_and_grad(theta, grad);
    return grad;
}

ParamVector initial_params(Index d, Index r, const FitConfig& cfg) {
    CMat g = cfg.init_scale * ginibre(r * d, d, derive_seed(cfg.seed, "init"));
    g.topRows(d) += CMat::Identity(d, d);
    return ParamVector::from_matrix(g, d);
}

MapFit fit_map(const TomographyDataset& ds, const SpamModel& spam, Index r, const FitConfig& cfg) {
    cfg.validate();
    const Index d = ds.dim();
    if (r < 1 || r > d * d) throw Error(ErrorCode::InvalidArgument, "fit_map: rank must lie in [1, d^2]");
    const TomographyObjective objective(ds, spam);
    const ParamVector p0 = initial_params(d, r, cfg);
    const std::size_t n_theta = p0.theta.size();
    const std::size_t total = objective.size();
    const bool batched = cfg.batch_size > 0 && cfg.batch_size < total;
    const Seed batch_seed = derive_seed(cfg.seed, "batch");

    std::vector<double> x0 = p0.theta;
    if (cfg.joint_spam) {
        if (spam.povm) throw Error(ErrorCode::InvalidArgument, "fit_map: joint SPAM refinement needs the corruption model");
        const CMat a = sqrtm_psd(spam.rho0);
        SpamParams omega;
        omega.a_rho_re = a.real();
        omega.a_rho_im = a.imag();
        omega.a_c = spam.corruption;
        const auto w = omega.to_vector();
        x0.insert(x0.end(), w.begin(), w.end());
    }

    auto evaluate = [&](const std::vector<double>& x, std::vector<double>& grad, int it) {
        std::vector<std::size_t> subset;
        if (batched) subset = sample_batch(total, cfg.batch_size, derive_seed(batch_seed, static_cast<std::uint64_t>(it)));
        const ParamVector theta(d, r, std::vector<double>(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n_theta)));
        if (!cfg.joint_spam) return objective.loss_and_grad(theta, grad, subset);
        const SpamParams omega =
            SpamParams::from_vector(std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(n_theta), x.end()), d);
        std::vector<double> g_omega;
        const double value = objective.joint_loss_and_grad(theta, omega, grad, g_omega, subset);
        grad.insert(grad.end(), g_omega.begin(), g_omega.end());
        return value;
    };
    auto [best, report] = adam_minimize(std::move(x0), evaluate, cfg);

    ParamVector params(d, r, std::vector<double>(best.begin(), best.begin() + static_cast<std::ptrdiff_t>(n_theta)));
    SpamModel fitted_spam = spam;
    if (cfg.joint_spam) {
        fitted_spam = params_to_spam(
            SpamParams::from_vector(std::vector<double>(best.begin() + static_cast<std::ptrdiff_t>(n_theta), best.end()), d));
    }
    if (batched || cfg.joint_spam) report.final_loss = TomographyObjective(ds, fitted_spam).loss(params);
    KrausMap map = params_to_kraus(params);
    return MapFit{std::move(map), std::move(params), std::move(fitted_spam), std::move(report)};
}

std::vector<PauliMode> spam_calibration_modes(int n) {
    std::uint64_t count = 1;
    for (int q = 0; q < n; ++q) count *= 6;
    std::vector<PauliMode> modes;
    for (std::uint64_t idx = 0; idx < count; ++idx) {
        PauliMode m;
        m.prep.resize(static_cast<std::size_t>(n));
        m.basis.assign(static_cast<std::size_t>(n), Axis::Z);
        std::uint64_t rest = idx;
        for (int q = n - 1; q >= 0; --q) {
            m.prep[static_cast<std::size_t>(q)] = static_cast<PrepState>(rest % 6);
            rest /= 6;
        }
        modes.push_back(std::move(m));
    }
    return modes;
}

double spam_loss(const SpamModel& model, const TomographyDataset& ds) {
    double total = 0.0;
    for (const auto& rec : ds.records) {
        const CMat ps = prep_unitary(rec.mode.prep);
        const auto p = measure_probs(ps * model.rho0 * ps.adjoint(), model, rec.mode);
        for (std::size_t j = 0; j < p.size(); ++j) total += (p[j] - rec.freqs[j]) * (p[j] - rec.freqs[j]);
    }
    return total;
}

namespace {

struct PovmParams {
    RMat a_re;
    RMat a_im;
    std::vector<CMat> g;
};

PovmParams unpack_povm(const std::vector<double>& x, Index d) {
    PovmParams p;
    p.a_re.resize(d, d);
    p.a_im.resize(d, d);
    std::size_t k = 0;
    for (RMat* m : {&p.a_re, &p.a_im})
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j) (*m)(i, j) = x[k++];
    for (Index e = 0; e < d; ++e) {
        CMat g(d, d);
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j) g(i, j).real(x[k++]);
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j) g(i, j).imag(x[k++]);
        p.g.push_back(std::move(g));
    }
    return p;
}

std::vector<double> pack_povm(const RMat& a_re, const RMat& a_im, const std::vector<CMat>& g) {
    std::vector<double> x = flatten_rows({&a_re, &a_im});
    for (const auto& gj : g) {
        const RMat re = gj.real();
        const RMat im = gj.imag();
        const auto part = flatten_rows({&re, &im});
        x.insert(x.end(), part.begin(), part.end());
    }
    return x;
}

// Loss and gradient of the POVM-model calibration fit (map = identity).
double povm_loss_and_grad(const std::vector<double>& x, const TomographyDataset& ds,
                          const std::vector<CMat>& preps, std::vector<double>& grad) {
    const Index d = ds.dim();
    const PovmParams p = unpack_povm(x, d);
    const CMat rho = params_to_state(p.a_re, p.a_im);
    std::vector<CMat> h;
    CMat dsum = CMat::Zero(d, d);
    for (const auto& g : p.g) {
        h.push_back(g * g.adjoint());
        dsum += h.back();
    }
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(dsum));
    const RVec& lam = es.eigenvalues();
    if (!(lam.minCoeff() > 0.0)) throw Error(ErrorCode::SingularD, "POVM fit: normalizing matrix is singular");
    const CMat& v = es.eigenvectors();
    const RVec inv_root = lam.cwiseSqrt().cwiseInverse();
    const CMat s = v * inv_root.cast<cplx>().asDiagonal() * v.adjoint();
    std::vector<CMat> e;
    for (const auto& hj : h) e.push_back(s * hj * s);

    double total = 0.0;
    std::vector<CMat> ebar(static_cast<std::size_t>(d), CMat::Zero(d, d));
    CMat g_rho = CMat::Zero(d, d);
    for (std::size_t m = 0; m < ds.records.size(); ++m) {
        const CMat& ps = preps[m];
        const CMat sigma = ps * rho * ps.adjoint();
        CMat weighted = CMat::Zero(d, d);
        for (Index j = 0; j < d; ++j) {
            const auto jj = static_cast<std::size_t>(j);
            const double phat = e[jj].cwiseProduct(sigma.transpose()).sum().real();
            const double gp = 2.0 * (phat - ds.records[m].freqs[jj]);
            total += 0.25 * gp * gp;
            ebar[jj] += gp * sigma;
            weighted += gp * e[jj];
        }
        g_rho += ps.adjoint() * weighted * ps;
    }

    // E_j = S H_j S with S = D^{-1/2}; the dS term goes through Daleckii-Krein.
    CMat y = CMat::Zero(d, d);
    for (Index j = 0; j < d; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        y += h[jj] * s * ebar[jj] + ebar[jj] * s * h[jj];
    }
    CMat f(d, d);
    for (Index a = 0; a < d; ++a) {
        for (Index b = 0; b < d; ++b) {
            const double gap = lam(a) - lam(b);
            if (std::abs(gap) > 1e-10 * std::max(lam(a), lam(b))) {
                f(a, b) = (inv_root(a) - inv_root(b)) / gap;
            } else {
                const double mid = 0.5 * (lam(a) + lam(b));
                f(a, b) = -0.5 * std::pow(mid, -1.5);
            }
        }
    }
    const CMat dbar = v * f.cwiseProduct(v.adjoint() * y * v) * v.adjoint();
    std::vector<CMat> gbar;
    for (Index j = 0; j < d; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        const CMat hbar = s * ebar[jj] * s + dbar;
        gbar.push_back(2.0 * hbar * p.g[jj]);
    }
    RMat g_re;
    RMat g_im;
    state_gradient(p.a_re, p.a_im, hermitian_part(g_rho), g_re, g_im);
    grad = pack_povm(g_re, g_im, gbar);
    return total;
}

} // namespace

double povm_spam_loss_and_grad(const std::vector<double>& x, const TomographyDataset& ds_identity,
                               std::vector<double>& grad) {
    const Index d = ds_identity.dim();
    if (x.size() != static_cast<std::size_t>(2 * d * d * (d + 1))) {
        throw Error(ErrorCode::SizeMismatch, "povm_spam_loss_and_grad: expected 2 d^2 (d + 1) parameters");
    }
    std::vector<CMat> preps;
    for (const auto& rec : ds_identity.records) preps.push_back(prep_unitary(rec.mode.prep));
    return povm_loss_and_grad(x, ds_identity, preps, grad);
}

SpamFit fit_spam(const TomographyDataset& ds_identity, const FitConfig& cfg, SpamModelKind kind) {
    cfg.validate();
    require_calibration_data(ds_identity);
    const Index d = ds_identity.dim();
    Rng rng(derive_seed(cfg.seed, "spam-init"));
    auto noise = [&](Index rows, Index cols) {
        RMat m(rows, cols);
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < cols; ++j) m(i, j) = cfg.init_scale * rng.normal();
        return m;
    };
    RMat a_re = noise(d, d);
    a_re(0, 0) += 1.0;
    const RMat a_im = noise(d, d);

    SpamModel fitted;
    FitReport report;
    if (kind == SpamModelKind::Corruption) {
        SpamParams init;
        init.a_rho_re = a_re;
        init.a_rho_im = a_im;
        init.a_c = RMat::Identity(d, d) + noise(d, d);
        const TomographyObjective objective(ds_identity, SpamModel::ideal(d));
        auto evaluate = [&](const std::vector<double>& x, std::vector<double>& grad, int) {
            return objective.spam_loss_and_grad(SpamParams::from_vector(x, d), grad);
        };
        auto [best, rep] = adam_minimize(init.to_vector(), evaluate, cfg);
        fitted = params_to_spam(SpamParams::from_vector(best, d));
        report = std::move(rep);
    } else {
        std::vector<CMat> g;
        for (Index j = 0; j < d; ++j) {
            CMat gj = cfg.init_scale * ginibre(d, d, rng);
            gj(j, j) += 1.0;
            g.push_back(std::move(gj));
        }
        std::vector<CMat> preps;
        for (const auto& rec : ds_identity.records) preps.push_back(prep_unitary(rec.mode.prep));
        auto evaluate = [&](const std::vector<double>& x, std::vector<double>& grad, int) {
            return povm_loss_and_grad(x, ds_identity, preps, grad);
        };
        auto [best, rep] = adam_minimize(pack_povm(a_re, a_im, g), evaluate, cfg);
        const PovmParams p = unpack_povm(best, d);
        fitted.rho0 = params_to_state(p.a_re, p.a_im);
        fitted.povm = povm_from_factors(p.g);
        fitted.corruption = povm_to_corruption(*fitted.povm);
        report = std::move(rep);
    }

    SpamFit out{fitted, std::move(report), false};
    const SpamModel canonical = canonicalize_spam(fitted);
    const double before = spam_loss(fitted, ds_identity);
    const double after = spam_loss(canonical, ds_identity);
    if (canonical_cost(canonical) < canonical_cost(fitted) && after <= before * (1.0 + 1e-9) + 1e-15) {
        out.model = canonical;
        out.canonicalized = true;
    }
    return out;
}

double kl_divergence(std::span<const double> f, std::span<const double> p, double pseudo) {
    if (f.size() != p.size() || f.empty()) throw Error(ErrorCode::SizeMismatch, "kl_divergence: lengths differ");
    double f_total = 0.0;
    double p_total = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        f_total += f[j] + pseudo;
        p_total += std::max(p[j], 0.0) + pseudo;
    }
    double kl = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double fj = (f[j] + pseudo) / f_total;
        const double pj = (std::max(p[j], 0.0) + pseudo) / p_total;
        if (fj > 0.0) kl += fj * std::log(fj / pj);
    }
    return kl;
}

namespace {

double mean_kl(const TomographyDataset& ds, const std::function<std::vector<double>(const PauliMode&)>& model) {
    if (ds.records.empty()) throw Error(ErrorCode::BadDataset, "kl_eval: empty test set");
    const double pseudo = ds.shots > 0 ? 0.5 / static_cast<double>(ds.shots) : 0.0;
    double total = 0.0;
    for (const auto& rec : ds.records) total += kl_divergence(rec.freqs, model(rec.mode), pseudo);
    return total / static_cast<double>(ds.records.size());
}

} // namespace

double kl_eval(const KrausMap& map, const SpamModel& spam, const TomographyDataset& ds_test) {
    return mean_kl(ds_test, [&](const PauliMode& m) { return predict_probs(map, spam, m); });
}

double kl_eval_superop(const CMat& superop, const SpamModel& spam, const TomographyDataset& ds_test) {
    return mean_kl(ds_test, [&](const PauliMode& m) { return predict_probs_superop(superop, spam, m); });
}

} // namespace nisqmaps
