#include "sca/enumerate.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <unordered_map>

#ifdef SCA_HAVE_OPENMP
#include <omp.h>
#endif

namespace sca {

namespace {
ExecMode& mode_cell() {
#ifdef SCA_HAVE_OPENMP
  static ExecMode m = ExecMode::Parallel;
#else
  static ExecMode m = ExecMode::Serial;
#endif
  return m;
}
}  // namespace

ExecMode default_exec_mode() { return mode_cell(); }
void set_default_exec_mode(ExecMode m) { mode_cell() = m; }

int worker_count() {
#ifdef SCA_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> tally_counts(
    std::uint64_t n, const std::function<std::uint64_t(std::uint64_t)>& item, ExecMode mode) {
  std::unordered_map<std::uint64_t, std::uint64_t> acc;
#ifdef SCA_HAVE_OPENMP
  if (mode == ExecMode::Parallel && n > 4096) {
    const int workers = omp_get_max_threads();
    std::vector<std::unordered_map<std::uint64_t, std::uint64_t>> partial(workers);
#pragma omp parallel num_threads(workers)
    {
      auto& mine = partial[omp_get_thread_num()];
#pragma omp for schedule(static)
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
        ++mine[item(static_cast<std::uint64_t>(i))];
    }
    for (const auto& p : partial)
      for (const auto& [k, c] : p) acc[k] += c;
  } else
#endif
  {
    (void)mode;
    for (std::uint64_t i = 0; i < n; ++i) ++acc[item(i)];
  }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out(acc.begin(), acc.end());
  std::sort(out.begin(), out.end());
  return out;
}

void fill_table(std::vector<std::uint32_t>& out,
                const std::function<std::uint32_t(std::uint64_t)>& fill, ExecMode mode) {
  const std::uint64_t n = out.size();
#ifdef SCA_HAVE_OPENMP
  if (mode == ExecMode::Parallel && n > 4096) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
      out[static_cast<std::uint64_t>(i)] = fill(static_cast<std::uint64_t>(i));
    return;
  }
#endif
  (void)mode;
  for (std::uint64_t i = 0; i < n; ++i) out[i] = fill(i);
}

std::uint64_t first_index_where(std::uint64_t n, const std::function<bool(std::uint64_t)>& pred,
                                ExecMode mode) {
#ifdef SCA_HAVE_OPENMP
  if (mode == ExecMode::Parallel && n > 64) {
    std::atomic<std::uint64_t> best{n};
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
      const std::uint64_t u = static_cast<std::uint64_t>(i);
      if (u >= best.load(std::memory_order_relaxed)) continue;
      if (pred(u)) {
        std::uint64_t cur = best.load(std::memory_order_relaxed);
        while (u < cur && !best.compare_exchange_weak(cur, u, std::memory_order_relaxed)) {
        }
      }
    }
    return best.load();
  }
#endif
  (void)mode;
  for (std::uint64_t i = 0; i < n; ++i)
    if (pred(i)) return i;
  return n;
}

}  // namespace sca
