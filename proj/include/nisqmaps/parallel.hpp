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

#include <cstddef>
#include <functional>

namespace nisqmaps {

/// Upper bound on worker threads used by parallel_for (default: hardware
/// concurrency). A value of 1 runs everything on the calling thread.
void set_max_threads(int threads);
int max_threads();

/// Calls body(i) for every i in [0, n). Work is split into contiguous
/// chunks; callers write results by index so the outcome does not depend
/// on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace nisqmaps
