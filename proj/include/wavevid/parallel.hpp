// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace wavevid {

// Worker count: `requested` if nonzero, else WAVEVID_THREADS if set and
// nonzero, else the hardware concurrency.
unsigned worker_count(unsigned requested = 0);

// Runs fn(i) for i in [0, count) on up to `workers` threads. The first
// exception thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn);

}  // namespace wavevid
