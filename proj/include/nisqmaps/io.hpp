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

#include "nisqmaps/channels.hpp"
#include "nisqmaps/retrieval.hpp"
#include "nisqmaps/spam.hpp"
#include "nisqmaps/spectral.hpp"
#include "nisqmaps/tomography.hpp"

namespace nisqmaps {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kGateConvention = "v1";
inline constexpr std::string_view kQubitOrder = "msb_first";

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);
double parse_double(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// {d, r, kraus: [s][row][col] = [re, im]}
std::string kraus_map_to_json(const KrausMap& map);
KrausMap kraus_map_from_json(std::string_view text);

// {d, rho0: [[re, im]...], corruption: [[real]...], povm?: [j][row][col] = [re, im]}
std::string spam_model_to_json(const SpamModel& model);
SpamModel spam_model_from_json(std::string_view text);

// "re,im" header, one eigenvalue per row in spectrum order
std::string spectrum_to_csv(const Spectrum& spec);
Spectrum spectrum_from_csv(std::string_view text);

// JSON header line, then `s;b;f_0;...;f_{d-1}` rows
std::string dataset_to_text(const TomographyDataset& ds);
TomographyDataset dataset_from_text(std::string_view text);

std::string du_fit_to_json(const DUFit& fit);
std::string fit_report_to_json(const FitReport& report, bool include_wall_time = true);

} // namespace nisqmaps
