#pragma once

#include <functional>

namespace rieszflow {

/// Worker count for parallel loops; 0 selects hardware concurrency.
void set_thread_count(int threads);
int thread_count();

/// Runs body(task) for task in [0, tasks). Tasks must write disjoint data;
/// callers keep the task decomposition independent of the thread count.
void parallel_for(int tasks, const std::function<void(int)>& body);

}  // namespace rieszflow
