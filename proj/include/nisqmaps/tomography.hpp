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

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nisqmaps/channels.hpp"
#include "nisqmaps/spam.hpp"

namespace nisqmaps {

enum class PrepState { PlusX, MinusX, PlusY, MinusY, PlusZ, MinusZ };
enum class Axis { X, Y, Z };

/// Product preparation s and measurement basis b; entry 0 is qubit 1, the
/// most significant bit of outcome indices.
struct PauliMode {
    std::vector<PrepState> prep;
    std::vector<Axis> basis;

    int n() const { return static_cast<int>(prep.size()); }

    /// Base-18 index; qubit 1 is the leading digit, digit = 3 * prep + basis.
    std::uint64_t index() const;
    static PauliMode from_index(std::uint64_t index, int n);

    std::string prep_string() const;   // e.g. "+x-z+y"
    std::string basis_string() const;  // e.g. "xzy"
    static PauliMode parse(std::string_view prep, std::string_view basis);

    friend bool operator==(const PauliMode&, const PauliMode&) = default;
};

std::uint64_t mode_count(int n);
/// N_m distinct modes, uniform without replacement, in ascending index order.
std::vector<PauliMode> sample_modes(int n, std::uint64_t n_modes, Seed seed);
std::vector<PauliMode> all_modes(int n);

CMat prep_unitary(const std::vector<PrepState>& prep);
CMat meas_unitary(const std::vector<Axis>& basis);

/// Outcome probabilities for an already-evolved state rho (before P_b).
std::vector<double> measure_probs(const CMat& evolved, const SpamModel& spam, const PauliMode& mode);
std::vector<double> predict_probs(const KrausMap& map, const SpamModel& spam, const PauliMode& mode);
std::vector<double> predict_probs_superop(const CMat& superop, const SpamModel& spam, const PauliMode& mode);

struct TomographyRecord {
    PauliMode mode;
    std::vector<double> freqs;
};

/// shots == 0 marks exact probabilities rather than sampled frequencies.
struct TomographyDataset {
    int n = 1;
    std::uint64_t shots = 1;
    std::vector<TomographyRecord> records;

    Index dim() const { return Index{1} << n; }
    /// Frequencies nonnegative, summing to 1 within 1e-9, integer multiples of 1/N_s.
    void validate() const;
};

TomographyDataset simulate_frequencies(const KrausMap& truth, const SpamModel& spam,
                                       const std::vector<PauliMode>& modes, std::uint64_t shots, Seed seed);
TomographyDataset simulate_frequencies_superop(const CMat& superop, const SpamModel& spam,
                                               const std::vector<PauliMode>& modes, std::uint64_t shots,
                                               Seed seed);

/// Noise-free dataset (shots = 0) holding the model probabilities themselves.
TomographyDataset exact_dataset(const KrausMap& truth, const SpamModel& spam, const std::vector<PauliMode>& modes);

std::pair<TomographyDataset, TomographyDataset> split(const TomographyDataset& ds, double train_fraction,
                                                      Seed seed);

} // namespace nisqmaps
