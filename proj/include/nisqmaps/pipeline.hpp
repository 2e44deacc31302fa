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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nisqmaps/channels.hpp"
#include "nisqmaps/circuits.hpp"
#include "nisqmaps/retrieval.hpp"

namespace nisqmaps {

/// Ground-truth map description shared by `gen-truth` and the pipeline.
struct TruthConfig {
    std::string kind = "lindblad";  // lindblad | du | circuit
    int n = 1;
    // lindblad
    double alpha = 1.0;
    double beta = 0.1;
    Index rank = 1;
    // du
    double p = 0.5;
    Index r = 1;
    // circuit, optionally followed by a Lindblad map exp(noise_beta L)
    int depth = 1;
    CircuitOptions circuit;
    double noise_alpha = 1.0;
    double noise_beta = 0.0;
    Index noise_rank = 1;
};

struct TruthMap {
    KrausMap map;
    CMat superop;
};

TruthMap make_truth(const TruthConfig& cfg, Seed seed);

struct SpamStageConfig {
    double c1 = 1.0;
    double c2 = 1.0;
    std::uint64_t calibration_shots = 1024;
};

struct DataStageConfig {
    std::uint64_t modes = 0;  // 0 = all 18^n
    std::uint64_t shots = 1024;
    double train_fraction = 0.9;
};

struct FitStageConfig {
    std::string spam_model = "corruption";  // corruption | povm
    Index rank = 0;                         // 0 = d^2
    FitConfig map;
    FitConfig spam;
};

struct SpectralStageConfig {
    bool enabled = true;
    std::vector<double> grid_p;  // empty = defaults
    std::vector<Index> grid_r;
    int m_samples = 5;
};

struct PipelineConfig {
    std::string experiment = "experiment";
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "out";
    TruthConfig truth;
    SpamStageConfig spam;
    DataStageConfig data;
    FitStageConfig fit;
    SpectralStageConfig spectral;

    /// Versioned JSON; unknown keys are rejected at every level.
    static PipelineConfig from_json(std::string_view text);
};

Seed stage_seed(std::uint64_t global, std::string_view stage);

struct Artifact {
    std::string name;
    std::filesystem::path path;
    std::string sha256;
};

struct PipelineResult {
    int status = 0;
    std::string failed_stage;
    std::string message;
    std::vector<Artifact> artifacts;
    std::filesystem::path manifest;
};

/// truth -> spam -> data -> fit -> spectral; writes manifest.json listing
/// every artifact with its SHA-256, also when a stage fails.
PipelineResult run_pipeline(const PipelineConfig& cfg, std::string_view config_text = {});

} // namespace nisqmaps
