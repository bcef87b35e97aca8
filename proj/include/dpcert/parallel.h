// Copyright 2026 The dpcert Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPCERT_PARALLEL_H_
#define DPCERT_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace dpcert {

// Number of worker threads: hardware concurrency, capped by the
// DPCERT_THREADS environment variable when it is set to a positive integer.
std::size_t WorkerCount();

// Runs body(i) for every i in [0, count). Items are split into contiguous
// chunks, one per worker. Callers must make body(i) depend only on i (e.g.
// through Rng::Split(i)) and write results into slot i, so the outcome does
// not depend on the number of workers. The first exception thrown by any
// worker is rethrown on the calling thread.
void ParallelFor(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace dpcert

#endif  // DPCERT_PARALLEL_H_
