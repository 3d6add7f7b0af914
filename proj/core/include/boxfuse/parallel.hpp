// Per-image parallel dispatch. Results land in caller-owned slots indexed by
// item, so parallel runs stay byte-deterministic. The BOXFUSE_THREADS
// environment variable caps the worker count.
#pragma once

#include <cstddef>
#include <functional>

namespace boxfuse {

int effective_thread_count();

void parallel_for(std::size_t count,
                  const std::function<void(std::size_t)>& fn);

}  // namespace boxfuse
