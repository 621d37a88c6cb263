#pragma once

#include <cstddef>
#include <functional>
#include <optional>

namespace gscatter {

/// Worker count: the explicit request if given, else GRASSMANN_SCATTER_THREADS,
/// else the hardware concurrency. Always at least 1.
unsigned resolve_threads(std::optional<unsigned> requested = std::nullopt);

/// Runs body(i) for i in [0, count) on up to `threads` workers. Indices are
/// handed out dynamically; callers store results per index so the outcome
/// does not depend on scheduling. The first exception is rethrown after all
/// workers stop.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace gscatter
