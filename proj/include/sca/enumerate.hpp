#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace sca {

/// Kernel execution policy. Parallel kernels must produce bit-identical
/// results to the serial reference; tests hold them to that.
enum class ExecMode { Serial, Parallel };

ExecMode default_exec_mode();
void set_default_exec_mode(ExecMode m);
int worker_count();

/// Tally kernel: evaluates item(i) for i in [0, n) and counts hits per key.
/// Returns (key, count) pairs sorted by key; the sort makes the merge order
/// independent of thread scheduling.
std::vector<std::pair<std::uint64_t, std::uint64_t>> tally_counts(
    std::uint64_t n, const std::function<std::uint64_t(std::uint64_t)>& item, ExecMode mode);

inline std::vector<std::pair<std::uint64_t, std::uint64_t>> tally_counts(
    std::uint64_t n, const std::function<std::uint64_t(std::uint64_t)>& item) {
  return tally_counts(n, item, default_exec_mode());
}

/// Parallel fill of a preallocated table: slot i := fill(i). Slots are
/// disjoint, so parallel and serial runs are trivially identical.
void fill_table(std::vector<std::uint32_t>& out,
                const std::function<std::uint32_t(std::uint64_t)>& fill, ExecMode mode);

/// First index in [0, n) where pred(i) is true, or n when none. The parallel
/// path commits the smallest hit, so the answer never depends on scheduling.
std::uint64_t first_index_where(std::uint64_t n, const std::function<bool(std::uint64_t)>& pred,
                                ExecMode mode);

}  // namespace sca
