#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace hallsand {

/// Thread count to use: `requested` when positive, else HALLSAND_THREADS when
/// set to a positive integer, else the hardware concurrency (at least 1).
std::size_t resolve_threads(std::size_t requested = 0);

/// Calls body(i) for every i in [0, count) on up to `threads` workers.
/// Indices are handed out dynamically, so `body` must write only to
/// index-owned storage. If any call throws, the exception from the lowest
/// failing index is rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace hallsand
