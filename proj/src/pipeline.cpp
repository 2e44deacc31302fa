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

#include "nisqmaps/pipeline.hpp"

#include <chrono>
#include <functional>
#include <initializer_list>
#include <set>

#include <json.hpp>

#include "nisqmaps/ensembles.hpp"
#include "nisqmaps/io.hpp"
#include "nisqmaps/spectral.hpp"

namespace nisqmaps {

using nlohmann::json;

namespace {

void check_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) throw Error(ErrorCode::Parse, "config: '" + std::string(where) + "' must be an object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (std::string_view k : allowed) known = known || item.key() == k;
        if (!known) throw Error(ErrorCode::Parse, "config: unknown key '" + item.key() + "' in '" + std::string(where) + "'");
    }
}

template <class T>
void read_opt(const json& obj, const char* key, T& target) {
    if (obj.contains(key)) target = obj.at(key).get<T>();
}

void read_fit(const json& obj, std::string_view where, FitConfig& cfg) {
    check_keys(obj, where, {"learning_rate", "beta1", "beta2", "epsilon", "max_iters", "batch_size", "init_scale", "patience"});
    read_opt(obj, "learning_rate", cfg.learning_rate);
    read_opt(obj, "beta1", cfg.beta1);
    read_opt(obj, "beta2", cfg.beta2);
    read_opt(obj, "epsilon", cfg.epsilon);
    read_opt(obj, "max_iters", cfg.max_iters);
    read_opt(obj, "batch_size", cfg.batch_size);
    read_opt(obj, "init_scale", cfg.init_scale);
    read_opt(obj, "patience", cfg.patience);
    cfg.validate();
}

} // namespace

TruthMap make_truth(const TruthConfig& cfg, Seed seed) {
    if (cfg.n < 1 || cfg.n > 6) throw Error(ErrorCode::InvalidArgument, "truth: n must lie in [1, 6]");
    const Index d = Index{1} << cfg.n;
    if (cfg.kind == "lindblad") {
        const LindbladParams params{d, cfg.rank, cfg.alpha, cfg.beta, derive_seed(seed, "lindblad")};
        LindbladMap lm = lindblad_map(random_lindbladian(params), cfg.beta, d);
        return TruthMap{std::move(lm.kraus), std::move(lm.superop)};
    }
    if (cfg.kind == "du") {
        const DUParams params{d, cfg.p, cfg.r};
        KrausMap map = sample_diluted_unitary(params, derive_seed(seed, "du"));
        CMat s = to_superop(map);
        return TruthMap{std::move(map), std::move(s)};
    }
    if (cfg.kind == "circuit") {
        const CMat u = build_unitary(sample_angles(cfg.n, cfg.depth, derive_seed(seed, "angles")), cfg.circuit);
        KrausMap ideal = unitary_channel(u);
        if (!(cfg.noise_beta > 0.0)) {
            CMat s = to_superop(ideal);
            return TruthMap{std::move(ideal), std::move(s)};
        }
        const LindbladParams params{d, cfg.noise_rank, cfg.noise_alpha, cfg.noise_beta, derive_seed(seed, "noise")};
        const LindbladMap noise = lindblad_map(random_lindbladian(params), cfg.noise_beta, d);
        CMat s = noise.superop * to_superop(ideal);
        KrausMap map = kraus_from_superop(s, d);
        return TruthMap{std::move(map), std::move(s)};
    }
    throw Error(ErrorCode::InvalidArgument, "truth: unknown kind '" + cfg.kind + "'");
}

PipelineConfig PipelineConfig::from_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        check_keys(j, "root", {"schema_version", "experiment", "seed", "output_dir", "truth", "spam", "data", "fit", "spectral"});
        if (j.at("schema_version").get<int>() != kSchemaVersion) {
            throw Error(ErrorCode::Parse, "config: unsupported schema_version");
        }
        PipelineConfig cfg;
        read_opt(j, "experiment", cfg.experiment);
        read_opt(j, "seed", cfg.seed);
        if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();

        if (j.contains("truth")) {
            const json& t = j.at("truth");
            check_keys(t, "truth", {"kind", "n", "alpha", "beta", "rank", "p", "r", "depth", "ladder", "rot_order",
                                    "noise_alpha", "noise_beta", "noise_rank"});
            read_opt(t, "kind", cfg.truth.kind);
            read_opt(t, "n", cfg.truth.n);
            read_opt(t, "alpha", cfg.truth.alpha);
            read_opt(t, "beta", cfg.truth.beta);
            read_opt(t, "rank", cfg.truth.rank);
            read_opt(t, "p", cfg.truth.p);
            read_opt(t, "r", cfg.truth.r);
            read_opt(t, "depth", cfg.truth.depth);
            read_opt(t, "noise_alpha", cfg.truth.noise_alpha);
            read_opt(t, "noise_beta", cfg.truth.noise_beta);
            read_opt(t, "noise_rank", cfg.truth.noise_rank);
            if (t.contains("ladder")) {
                const auto v = t.at("ladder").get<std::string>();
                if (v != "up" && v != "down") throw Error(ErrorCode::Parse, "config: ladder must be up or down");
                cfg.truth.circuit.ladder = v == "up" ? Ladder::Up : Ladder::Down;
            }
            if (t.contains("rot_order")) {
                const auto v = t.at("rot_order").get<std::string>();
                if (v != "yz" && v != "zy") throw Error(ErrorCode::Parse, "config: rot_order must be yz or zy");
                cfg.truth.circuit.rot_order = v == "yz" ? RotationOrder::YZ : RotationOrder::ZY;
            }
        }
        if (j.contains("spam")) {
            const json& s = j.at("spam");
            check_keys(s, "spam", {"c1", "c2", "calibration_shots"});
            read_opt(s, "c1", cfg.spam.c1);
            read_opt(s, "c2", cfg.spam.c2);
            read_opt(s, "calibration_shots", cfg.spam.calibration_shots);
        }
        if (j.contains("data")) {
            const json& dd = j.at("data");
            check_keys(dd, "data", {"modes", "shots", "train_fraction"});
            read_opt(dd, "modes", cfg.data.modes);
            read_opt(dd, "shots", cfg.data.shots);
            read_opt(dd, "train_fraction", cfg.data.train_fraction);
        }
        if (j.contains("fit")) {
            const json& f = j.at("fit");
            check_keys(f, "fit", {"spam_model", "rank", "map", "spam"});
            read_opt(f, "spam_model", cfg.fit.spam_model);
            if (cfg.fit.spam_model != "corruption" && cfg.fit.spam_model != "povm") {
                throw Error(ErrorCode::Parse, "config: spam_model must be corruption or povm");
            }
            read_opt(f, "rank", cfg.fit.rank);
            if (f.contains("map")) read_fit(f.at("map"), "fit.map", cfg.fit.map);
            if (f.contains("spam")) read_fit(f.at("spam"), "fit.spam", cfg.fit.spam);
        }
        if (j.contains("spectral")) {
            const json& sp = j.at("spectral");
            check_keys(sp, "spectral", {"enabled", "grid_p", "grid_r", "m_samples"});
            read_opt(sp, "enabled", cfg.spectral.enabled);
            read_opt(sp, "grid_p", cfg.spectral.grid_p);
            read_opt(sp, "grid_r", cfg.spectral.grid_r);
            read_opt(sp, "m_samples", cfg.spectral.m_samples);
        }
        return cfg;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("config: ") + e.what());
    }
}

Seed stage_seed(std::uint64_t global, std::string_view stage) {
    return derive_seed(Seed{global}, stage);
}

PipelineResult run_pipeline(const PipelineConfig& cfg, std::string_view config_text) {
    namespace fs = std::filesystem;
    PipelineResult result;
    fs::create_directories(cfg.output_dir);
    json timings = json::object();
    json summary;
    summary["experiment"] = cfg.experiment;

    auto emit = [&](const std::string& name, const std::string& text) {
        const fs::path path = cfg.output_dir / name;
        write_text_file(path, text);
        result.artifacts.push_back(Artifact{name, path, sha256_hex(text)});
    };

    const Index d = Index{1} << cfg.truth.n;
    std::optional<TruthMap> truth;
    SpamModel spam_truth = SpamModel::ideal(d);
    TomographyDataset calibration, train, test;
    std::optional<SpamModel> spam_fit;
    std::optional<MapFit> map_fit;

    const std::vector<std::pair<std::string, std::function<void()>>> stages = {
        {"truth",
         [&] {
             truth = make_truth(cfg.truth, stage_seed(cfg.seed, "truth"));
             emit("truth_map.json", kraus_map_to_json(truth->map));
             emit("truth_spectrum.csv", spectrum_to_csv(spectrum_of_superop(truth->superop, d)));
         }},
        {"spam",
         [&] {
             spam_truth = synthetic_spam(d, cfg.spam.c1, cfg.spam.c2, stage_seed(cfg.seed, "spam"));
             emit("spam_truth.json", spam_model_to_json(spam_truth));
         }},
        {"data",
         [&] {
             const Seed seed = stage_seed(cfg.seed, "data");
             const std::uint64_t n_modes = cfg.data.modes == 0 ? mode_count(cfg.truth.n) : cfg.data.modes;
             const auto modes = sample_modes(cfg.truth.n, n_modes, derive_seed(seed, "modes"));
             const TomographyDataset full = simulate_frequencies_superop(truth->superop, spam_truth, modes, cfg.data.shots,
                                                                         derive_seed(seed, "map"));
             std::tie(train, test) = split(full, cfg.data.train_fraction, derive_seed(seed, "split"));
             calibration = simulate_frequencies(KrausMap::identity(d), spam_truth,
                                                spam_calibration_modes(cfg.truth.n), cfg.spam.calibration_shots,
                                                derive_seed(seed, "calibration"));
             summary["split"] = {{"train", train.records.size()}, {"test", test.records.size()}};
             emit("calibration.txt", dataset_to_text(calibration));
             emit("data_train.txt", dataset_to_text(train));
             emit("data_test.txt", dataset_to_text(test));
         }},
        {"fit",
         [&] {
             const Seed seed = stage_seed(cfg.seed, "fit");
             FitConfig spam_cfg = cfg.fit.spam;
             spam_cfg.seed = derive_seed(seed, "spam");
             const SpamModelKind kind = cfg.fit.spam_model == "povm" ? SpamModelKind::Povm : SpamModelKind::Corruption;
             const SpamFit sf = fit_spam(calibration, spam_cfg, kind);
             spam_fit = sf.model;
             emit("spam_fit.json", spam_model_to_json(sf.model));

             FitConfig map_cfg = cfg.fit.map;
             map_cfg.seed = derive_seed(seed, "map");
             const Index rank = cfg.fit.rank == 0 ? d * d : cfg.fit.rank;
             map_fit = fit_map(train, *spam_fit, rank, map_cfg);
             emit("map_fit.json", kraus_map_to_json(map_fit->map));
             emit("fit_report.json", fit_report_to_json(map_fit->report, false));

             const double kl = kl_eval(map_fit->map, *spam_fit, test);
             summary["fit"] = {{"rank", rank},
                               {"final_loss", map_fit->report.final_loss},
                               {"iterations", map_fit->report.iterations},
                               {"no_progress", map_fit->report.no_progress},
                               {"kl_test", kl},
                               {"inverse_kl_test", kl > 0.0 ? 1.0 / kl : 0.0},
                               {"kl_test_truth", kl_eval_superop(truth->superop, spam_truth, test)}};
             summary["spam"] = {{"model", cfg.fit.spam_model},
                                {"state_fidelity", state_fidelity(spam_truth.rho0, sf.model.rho0)},
                                {"corruption_fidelity", corruption_fidelity(spam_truth.corruption, sf.model.corruption)},
                                {"canonicalized", sf.canonicalized}};
         }},
        {"spectral",
         [&] {
             const Spectrum retrieved = spectrum(map_fit->map);
             const Spectrum target = spectrum_of_superop(truth->superop, d);
             emit("spectrum.csv", spectrum_to_csv(retrieved));
             const double sigma = kde_sigma(retrieved);
             summary["spectral"] = {{"sigma", sigma},
                                    {"sd_retrieved_truth", spectral_distance(retrieved, target, sigma)}};
             if (cfg.spectral.enabled) {
                 const auto grid_p = cfg.spectral.grid_p.empty() ? default_grid_p() : cfg.spectral.grid_p;
                 const auto grid_r = cfg.spectral.grid_r.empty() ? default_grid_r(d) : cfg.spectral.grid_r;
                 const DUSpectrumBank bank(d, grid_p, grid_r, cfg.spectral.m_samples, stage_seed(cfg.seed, "spectral"));
                 const DUFit fit = fit_du(retrieved, bank);
                 const DUFit fit_truth = fit_du(target, bank);
                 emit("du_fit.json", du_fit_to_json(fit));
                 summary["spectral"]["p_star"] = fit.p_star;
                 summary["spectral"]["r_star"] = fit.r_star;
                 summary["spectral"]["support"] = to_string(classify_support(fit));
                 summary["spectral"]["truth_support"] = to_string(classify_support(fit_truth));
             }
         }},
    };

    for (const auto& [name, body] : stages) {
        const auto start = std::chrono::steady_clock::now();
        try {
            body();
        } catch (const std::exception& e) {
            result.status = 1;
            result.failed_stage = name;
            result.message = e.what();
        }
        timings[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (result.status != 0) break;
    }
    if (result.status == 0) emit("report.json", summary.dump(2) + "\n");

    json manifest;
    manifest["schema_version"] = kSchemaVersion;
    manifest["experiment"] = cfg.experiment;
    manifest["seed"] = cfg.seed;
    manifest["gate_convention"] = kGateConvention;
    if (!config_text.empty()) manifest["config_sha256"] = sha256_hex(config_text);
    manifest["status"] = result.status == 0 ? "ok" : "failed";
    if (result.status != 0) {
        manifest["failed_stage"] = result.failed_stage;
        manifest["message"] = result.message;
    }
    if (summary.contains("split")) manifest["split"] = summary["split"];
    json artifacts = json::array();
    for (const auto& a : result.artifacts) artifacts.push_back({{"name", a.name}, {"sha256", a.sha256}});
    manifest["artifacts"] = std::move(artifacts);
    manifest["unhashed"] = {{"timings_seconds", timings}};
    result.manifest = cfg.output_dir / "manifest.json";
    write_text_file(result.manifest, manifest.dump(2) + "\n");
    return result;
}

} // namespace nisqmaps
