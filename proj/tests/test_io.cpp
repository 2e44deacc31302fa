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

#include <doctest.h>

#include <filesystem>
#include <set>

#include <json.hpp>

#include "nisqmaps/io.hpp"
#include "nisqmaps/pipeline.hpp"
#include "test_util.hpp"

using namespace nisqmaps;
using namespace nisqmaps::testing;
using nlohmann::json;

TEST_CASE("format_double round-trips exactly") {
    Rng rng(Seed{1});
    for (int i = 0; i < 1000; ++i) {
        const double x = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<int>(rng.below(30)) - 15);
        CHECK(parse_double(format_double(x)) == x);
    }
    CHECK(parse_double("0.25") == 0.25);
    CHECK_THROWS_AS(parse_double("abc"), Error);
    CHECK_THROWS_AS(parse_double("1.5x"), Error);
}

TEST_CASE("sha256 known vectors") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("KrausMap JSON round-trip") {
    const KrausMap map = params_to_kraus(ParamVector::random(4, 3, Seed{2}));
    const std::string text = kraus_map_to_json(map);
    const KrausMap back = kraus_map_from_json(text);
    REQUIRE(back.rank() == 3);
    for (std::size_t s = 0; s < 3; ++s) CHECK(back.kraus()[s] == map.kraus()[s]);
    CHECK(kraus_map_to_json(back) == text);
    const json j = json::parse(text);
    CHECK(j.at("d") == 4);
    CHECK(j.at("r") == 3);
    CHECK_THROWS_AS(kraus_map_from_json("{\"d\": 2}"), Error);
    CHECK_THROWS_AS(kraus_map_from_json("not json"), Error);
}

TEST_CASE("SpamModel JSON round-trip") {
    const SpamModel with_povm = synthetic_spam(4, 0.9, 0.8, Seed{3});
    const std::string text = spam_model_to_json(with_povm);
    const SpamModel back = spam_model_from_json(text);
    CHECK(back.rho0 == with_povm.rho0);
    CHECK(back.corruption == with_povm.corruption);
    REQUIRE(back.povm.has_value());
    for (std::size_t j = 0; j < 4; ++j) CHECK(back.povm->elements[j] == with_povm.povm->elements[j]);
    CHECK(spam_model_to_json(back) == text);

    SpamModel plain = with_povm;
    plain.povm.reset();
    CHECK(!spam_model_from_json(spam_model_to_json(plain)).povm.has_value());
}

TEST_CASE("Spectrum CSV round-trip") {
    const Spectrum s = spectrum(params_to_kraus(ParamVector::random(3, 2, Seed{4})));
    const std::string csv = spectrum_to_csv(s);
    CHECK(csv.rfind("re,im\n", 0) == 0);
    const Spectrum back = spectrum_from_csv(csv);
    CHECK(back.values == s.values);
    CHECK(spectrum_to_csv(back) == csv);
}

TEST_CASE("dataset text round-trip") {
    const auto ds = simulate_frequencies(params_to_kraus(ParamVector::random(8, 2, Seed{5})), synthetic_spam(8, 0.9, 0.8, Seed{6}),
                                         sample_modes(3, 50, Seed{7}), 1024, Seed{8});
    const std::string text = dataset_to_text(ds);
    const auto header = json::parse(text.substr(0, text.find('\n')));
    CHECK(header.at("n") == 3);
    CHECK(header.at("N_s") == 1024);
    CHECK(header.at("gate_convention") == "v1");
    CHECK(header.at("qubit_order") == "msb_first");
    const std::string second = text.substr(text.find('\n') + 1);
    CHECK(second.find(ds.records[0].mode.prep_string() + ";" + ds.records[0].mode.basis_string() + ";") == 0);

    const auto back = dataset_from_text(text);
    REQUIRE(back.records.size() == ds.records.size());
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        CHECK(back.records[i].mode == ds.records[i].mode);
        CHECK(back.records[i].freqs == ds.records[i].freqs);
    }
    CHECK(dataset_to_text(back) == text);

    CHECK_THROWS_AS(dataset_from_text("{\"n\":1,\"N_s\":4,\"gate_convention\":\"v2\",\"qubit_order\":\"msb_first\"}\n"), Error);
    CHECK_THROWS_AS(
        dataset_from_text("{\"n\":1,\"N_s\":4,\"gate_convention\":\"v1\",\"qubit_order\":\"msb_first\"}\n+z;z;0.3;0.7\n"),
        Error);
}

TEST_CASE("DU fit and report JSON") {
    const Spectrum spec = spectrum(sample_diluted_unitary({2, 0.5, 2}, Seed{1}));
    const DUFit fit = fit_du(spec, 2, {0.2, 0.9}, {1, 2}, 1, Seed{2});
    const json j = json::parse(du_fit_to_json(fit));
    CHECK(j.at("p_star").get<double>() == fit.p_star);
    CHECK(j.at("r_star").get<Index>() == fit.r_star);
    CHECK(j.contains("R_plus"));
    CHECK(j.contains("R_minus"));
    CHECK(j.at("scores").size() == 2u);

    FitReport report;
    report.loss_trace = {3.0, 2.0};
    report.wall_time = 1.5;
    CHECK(json::parse(fit_report_to_json(report)).contains("wall_time"));
    CHECK(!json::parse(fit_report_to_json(report, false)).contains("wall_time"));
}

TEST_CASE("pipeline config parsing") {
    const std::string text = R"({
        "schema_version": 1,
        "experiment": "small",
        "seed": 5,
        "truth": {"kind": "lindblad", "n": 1, "alpha": 1.0, "beta": 0.2, "rank": 2},
        "spam": {"c1": 0.95, "c2": 0.9, "calibration_shots": 2048},
        "data": {"shots": 512, "train_fraction": 0.5},
        "fit": {"rank": 2, "map": {"max_iters": 200}, "spam": {"max_iters": 200, "learning_rate": 0.02}},
        "spectral": {"grid_p": [0.2, 0.5], "grid_r": [1, 2], "m_samples": 1}
    })";
    const PipelineConfig cfg = PipelineConfig::from_json(text);
    CHECK(cfg.experiment == "small");
    CHECK(cfg.seed == 5u);
    CHECK(cfg.truth.rank == 2);
    CHECK(cfg.spam.calibration_shots == 2048u);
    CHECK(cfg.fit.map.max_iters == 200);
    CHECK(cfg.fit.spam.learning_rate == 0.02);
    CHECK(cfg.spectral.grid_r == std::vector<Index>{1, 2});

    CHECK_THROWS_AS(PipelineConfig::from_json(R"({"schema_version": 1, "sed": 5})"), Error);
    CHECK_THROWS_AS(PipelineConfig::from_json(R"({"schema_version": 1, "truth": {"knd": "du"}})"), Error);
    CHECK_THROWS_AS(PipelineConfig::from_json(R"({"schema_version": 1, "fit": {"map": {"lr": 0.1}}})"), Error);
    CHECK_THROWS_AS(PipelineConfig::from_json(R"({"schema_version": 2})"), Error);
    CHECK_THROWS_AS(PipelineConfig::from_json(R"({"seed": 1})"), Error);
}

TEST_CASE("shipped configs parse") {
    int count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(std::filesystem::path(NISQMAPS_SOURCE_DIR) / "configs")) {
        if (entry.path().extension() != ".json") continue;
        CAPTURE(entry.path().string());
        CHECK_NOTHROW(PipelineConfig::from_json(read_text_file(entry.path())));
        ++count;
    }
    CHECK(count >= 2);
    const PipelineConfig bench =
        PipelineConfig::from_json(read_text_file(std::filesystem::path(NISQMAPS_SOURCE_DIR) / "configs/appendix-c3-benchmark.json"));
    CHECK(bench.truth.n == 3);
    CHECK(bench.data.modes == 1784u);
    CHECK(bench.data.shots == 1024u);
}

TEST_CASE("stage seeds depend on the global seed and the stage name") {
    CHECK(stage_seed(1, "fit") == stage_seed(1, "fit"));
    CHECK(!(stage_seed(1, "fit") == stage_seed(2, "fit")));
    CHECK(!(stage_seed(1, "fit") == stage_seed(1, "data")));
}

TEST_CASE("pipeline runs end to end and is reproducible") {
    PipelineConfig cfg;
    cfg.experiment = "tiny";
    cfg.seed = 11;
    cfg.truth.n = 1;
    cfg.truth.rank = 2;
    cfg.spam.c1 = 0.95;
    cfg.spam.c2 = 0.9;
    cfg.data.shots = 512;
    cfg.data.train_fraction = 0.5;
    cfg.fit.map.max_iters = 300;
    cfg.fit.spam.max_iters = 300;
    cfg.spectral.grid_p = {0.2, 0.5, 0.8};
    cfg.spectral.grid_r = {1, 2, 4};
    cfg.spectral.m_samples = 2;

    std::vector<json> manifests;
    for (int run = 0; run < 2; ++run) {
        cfg.output_dir = scratch_dir("pipeline_" + std::to_string(run));
        const PipelineResult result = run_pipeline(cfg, "config text");
        REQUIRE(result.status == 0);
        manifests.push_back(json::parse(read_text_file(result.manifest)));
        for (const auto& a : result.artifacts) CHECK(sha256_file(a.path) == a.sha256);
    }
    CHECK(manifests[0].at("artifacts") == manifests[1].at("artifacts"));
    CHECK(manifests[0].at("config_sha256") == sha256_hex("config text"));
    CHECK(manifests[0].at("status") == "ok");
    CHECK(manifests[0].at("split").at("train") == 9);
    CHECK(manifests[0].at("split").at("test") == 9);
    std::set<std::string> names;
    for (const auto& a : manifests[0].at("artifacts")) names.insert(a.at("name").get<std::string>());
    for (const char* expected : {"truth_map.json", "truth_spectrum.csv", "spam_truth.json", "calibration.txt",
                                 "data_train.txt", "data_test.txt", "spam_fit.json", "map_fit.json", "fit_report.json",
                                 "spectrum.csv", "du_fit.json", "report.json"}) {
        CHECK(names.count(expected) == 1u);
    }

    // a different seed changes the artifacts
    cfg.seed = 12;
    cfg.output_dir = scratch_dir("pipeline_other");
    const PipelineResult other = run_pipeline(cfg);
    CHECK(json::parse(read_text_file(other.manifest)).at("artifacts") != manifests[0].at("artifacts"));
}

TEST_CASE("pipeline records the train/test split of the benchmark budget") {
    PipelineConfig cfg;
    cfg.truth.n = 3;
    cfg.data.modes = 1784;
    cfg.data.train_fraction = 0.9;
    cfg.fit.map.max_iters = 1;
    cfg.fit.spam.max_iters = 1;
    cfg.fit.rank = 1;
    cfg.spectral.enabled = false;
    cfg.output_dir = scratch_dir("pipeline_split");
    const PipelineResult result = run_pipeline(cfg);
    REQUIRE(result.status == 0);
    const json manifest = json::parse(read_text_file(result.manifest));
    CHECK(manifest.at("split").at("train") == 1605);
    CHECK(manifest.at("split").at("test") == 179);
}

TEST_CASE("pipeline failures produce a partial manifest") {
    PipelineConfig cfg;
    cfg.truth.n = 1;
    cfg.truth.rank = 9;  // invalid: rank > d^2
    cfg.output_dir = scratch_dir("pipeline_fail");
    const PipelineResult result = run_pipeline(cfg);
    CHECK(result.status != 0);
    CHECK(result.failed_stage == "truth");
    const json manifest = json::parse(read_text_file(result.manifest));
    CHECK(manifest.at("status") == "failed");
    CHECK(manifest.at("failed_stage") == "truth");
}
