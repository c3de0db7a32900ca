#include "sca/core.hpp"

#include <map>
#include <numeric>

#include "sca/budget.hpp"
#include "sca/rng.hpp"

#ifdef SCA_HAVE_OPENMP
#include <omp.h>
#endif

namespace sca {

namespace {

// Scratch for gather-and-apply; thread-local so tally items can run
// concurrently without allocation churn.
thread_local std::vector<Symbol> tl_qbuf;
thread_local std::vector<Symbol> tl_sbuf;
thread_local std::vector<Symbol> tl_digits;
thread_local std::vector<Symbol> tl_rowa;
thread_local std::vector<Symbol> tl_rowb;

inline Symbol eval_cell(const Sca& a, Cell z, const Symbol* states, Cell states_lo,
                        const Symbol* random, Cell random_lo) {
  auto& qb = tl_qbuf;
  auto& sb = tl_sbuf;
  qb.resize(a.r());
  sb.resize(a.r_prime());
  const auto& V = a.nbr().offsets;
  const auto& Vp = a.rnd_nbr().offsets;
  for (std::size_t j = 0; j < V.size(); ++j) qb[j] = states[z + V[j] - states_lo];
  for (std::size_t j = 0; j < Vp.size(); ++j) sb[j] = random[z + Vp[j] - random_lo];
  return a.apply_rule(qb, sb);
}

void require_state_alphabet(const Sca& a, const Alphabet& got, const char* what) {
  if (!(got == a.states())) throw AlphabetMismatch(std::string(what) + ": state alphabet mismatch");
}

void require_random_alphabet(const Sca& a, const Alphabet& got, const char* what) {
  if (!(got == a.random()))
    throw AlphabetMismatch(std::string(what) + ": random alphabet mismatch");
}

CylinderDist dist_from_counts(const Alphabet& alph, const Window& w,
                              std::vector<std::pair<std::uint64_t, std::uint64_t>> counts,
                              const BigInt& denom) {
  std::vector<std::pair<std::uint64_t, Rational>> weights;
  weights.reserve(counts.size());
  for (const auto& [rank, c] : counts) weights.emplace_back(rank, make_fraction(BigInt(c), denom));
  return CylinderDist(alph, w.z, w.L, std::move(weights));
}

}  // namespace

PeriodicConfig apply_explicit(const Sca& a, const PeriodicConfig& c, const PeriodicConfig& s) {
  require_state_alphabet(a, c.alphabet, "apply_explicit");
  require_random_alphabet(a, s.alphabet, "apply_explicit");
  const std::int64_t p = lcm_period(c.period(), s.period());
  check_budget(static_cast<std::uint64_t>(p), "apply_explicit period");
  const int rho = radius(a);
  // Unroll both configurations over [-rho, p + rho) once, then evaluate.
  const Cell lo = -rho;
  const std::int64_t len = p + 2 * rho;
  std::vector<Symbol> cs(static_cast<std::size_t>(len)), ss(static_cast<std::size_t>(len));
  for (std::int64_t i = 0; i < len; ++i) {
    cs[static_cast<std::size_t>(i)] = c.at(lo + i);
    ss[static_cast<std::size_t>(i)] = s.at(lo + i);
  }
  std::vector<Symbol> out(static_cast<std::size_t>(p));
  for (std::int64_t z = 0; z < p; ++z)
    out[static_cast<std::size_t>(z)] = eval_cell(a, z, cs.data(), lo, ss.data(), lo);
  return PeriodicConfig(a.states(), std::move(out));
}

PeriodicConfig apply_deterministic(const Sca& a, const PeriodicConfig& c) {
  return apply_explicit(a, c, PeriodicConfig(a.random(), {0}));
}

PeriodicConfig iterate_explicit(const Sca& a, const PeriodicConfig& c, const RandomSeq& ss) {
  PeriodicConfig row = c;
  for (const auto& s : ss.steps) row = apply_explicit(a, row, s);
  return row;
}

CylinderDist one_step_dist(const Sca& a, const Word& context, const Window& w, ExecMode mode) {
  require_state_alphabet(a, context.alphabet, "one_step_dist");
  if (w.L < 1) throw Error("window length must be positive");
  const int rho = radius(a);
  const Cell lo = w.z - rho;
  const Cell hi = w.z + w.L - 1 + rho;
  if (!context.covers(lo, hi))
    throw InsufficientContext("one_step_dist: context must cover the dependence span");
  const std::int64_t cone = w.L + 2 * rho;

  const std::uint64_t n_random = pow_sat(a.random().size(), static_cast<std::uint64_t>(cone));
  check_budget(n_random, "one_step_dist cone");
  if (pow_sat(a.states().size(), static_cast<std::uint64_t>(w.L)) == UINT64_MAX)
    throw BudgetExceeded("one_step_dist: output word space too large to rank");

  std::vector<Symbol> states(static_cast<std::size_t>(cone));
  for (std::int64_t i = 0; i < cone; ++i) states[static_cast<std::size_t>(i)] = context.at(lo + i);

  const std::uint64_t rsize = a.random().size();
  const std::uint64_t qsize = a.states().size();
  const auto item = [&](std::uint64_t idx) -> std::uint64_t {
    auto& digits = tl_digits;
    digits.resize(static_cast<std::size_t>(cone));
    std::uint64_t v = idx;
    for (std::int64_t i = cone - 1; i >= 0; --i) {
      digits[static_cast<std::size_t>(i)] = static_cast<Symbol>(v % rsize);
      v /= rsize;
    }
    std::uint64_t out = 0;
    for (std::int64_t j = 0; j < w.L; ++j)
      out = out * qsize + eval_cell(a, w.z + j, states.data(), lo, digits.data(), lo);
    return out;
  };

  auto counts = tally_counts(n_random, item, mode);
  return dist_from_counts(a.states(), w, std::move(counts),
                          ipow(BigInt(a.random().size()), static_cast<std::uint64_t>(cone)));
}

CylinderDist ScaKernel::one_step(const Word& context, const Window& w, ExecMode mode) const {
  return one_step_dist(a_, context, w, mode);
}

CylinderDist iterate_dist(const WindowKernel& k, const Word& context, const Window& w,
                          std::uint64_t t, ExecMode mode) {
  const Alphabet& alph = k.state_alphabet();
  if (!(context.alphabet == alph)) throw AlphabetMismatch("iterate_dist: context alphabet");

  std::vector<Window> chain(t + 1);
  chain[t] = w;
  for (std::uint64_t j = t; j > 0; --j) {
    const auto [lo, hi] = k.context_span(chain[j]);
    chain[j - 1] = Window{lo, hi - lo + 1};
  }
  if (!context.covers(chain[0].z, chain[0].z + chain[0].L - 1))
    throw InsufficientContext("iterate_dist: context must cover the t-step dependence span");

  CylinderDist d = CylinderDist::point_mass(context.slice(chain[0].z, chain[0].L));
  for (std::uint64_t step = 1; step <= t; ++step) {
    const Window inner = chain[step - 1];
    const Window outer = chain[step];
    const auto& support = d.entries();

    std::map<std::uint64_t, Rational> acc;
    const auto absorb = [&](std::map<std::uint64_t, Rational>& into,
                            const std::pair<std::uint64_t, Rational>& ventry) {
      if (ventry.second == 0) return;
      const Word v(alph, word_of_rank(ventry.first, alph.size(), inner.L), inner.z);
      const Word cv = context.overwrite_extend(v);
      const CylinderDist stepd = k.one_step(cv, outer, ExecMode::Serial);
      for (const auto& [urank, uw] : stepd.entries())
        if (uw != 0) into[urank] += ventry.second * uw;
    };

#ifdef SCA_HAVE_OPENMP
    if (mode == ExecMode::Parallel && support.size() > 32) {
      const int workers = omp_get_max_threads();
      std::vector<std::map<std::uint64_t, Rational>> partial(workers);
#pragma omp parallel num_threads(workers)
      {
        auto& mine = partial[omp_get_thread_num()];
#pragma omp for schedule(dynamic, 8)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(support.size()); ++i)
          absorb(mine, support[static_cast<std::size_t>(i)]);
      }
      for (auto& p : partial)
        for (auto& [rank, wt] : p) acc[rank] += wt;
    } else
#endif
    {
      for (const auto& ventry : support) {
        // Inner one-step enumerations may still parallelize.
        if (ventry.second == 0) continue;
        const Word v(alph, word_of_rank(ventry.first, alph.size(), inner.L), inner.z);
        const Word cv = context.overwrite_extend(v);
        const CylinderDist stepd = k.one_step(cv, outer, mode);
        for (const auto& [urank, uw] : stepd.entries())
          if (uw != 0) acc[urank] += ventry.second * uw;
      }
    }
    d = CylinderDist(alph, outer.z, outer.L,
                     std::vector<std::pair<std::uint64_t, Rational>>(acc.begin(), acc.end()));
  }
  return d;
}

CylinderDist iter_dist(const Sca& a, const Word& context, const Window& w, std::uint64_t t,
                       ExecMode mode) {
  return iterate_dist(ScaKernel(a), context, w, t, mode);
}

CylinderDist iter_dist_bruteforce(const Sca& a, const Word& context, const Window& w,
                                  std::uint64_t t, ExecMode mode) {
  require_state_alphabet(a, context.alphabet, "iter_dist_bruteforce");
  const int rho = radius(a);

  // Row k lives on [w.z - (t-k) rho, w.z + w.L - 1 + (t-k) rho]; the random
  // word of step k spans row k-1's cells.
  const auto row_lo = [&](std::uint64_t step) {
    return w.z - static_cast<Cell>((t - step)) * rho;
  };
  const auto row_len = [&](std::uint64_t step) {
    return w.L + 2 * static_cast<std::int64_t>(t - step) * rho;
  };
  if (!context.covers(row_lo(0), row_lo(0) + row_len(0) - 1))
    throw InsufficientContext("iter_dist_bruteforce: context must cover the dependence cone");

  if (t == 0) return CylinderDist::point_mass(context.slice(w.z, w.L));

  std::int64_t total_cells = 0;
  for (std::uint64_t step = 1; step <= t; ++step) total_cells += row_len(step - 1);
  const std::uint64_t n_random =
      pow_sat(a.random().size(), static_cast<std::uint64_t>(total_cells));
  check_budget(n_random, "iter_dist_bruteforce cone");

  std::vector<Symbol> base(static_cast<std::size_t>(row_len(0)));
  for (std::int64_t i = 0; i < row_len(0); ++i)
    base[static_cast<std::size_t>(i)] = context.at(row_lo(0) + i);

  const std::uint64_t rsize = a.random().size();
  const std::uint64_t qsize = a.states().size();
  const auto item = [&](std::uint64_t idx) -> std::uint64_t {
    auto& digits = tl_digits;
    digits.resize(static_cast<std::size_t>(total_cells));
    std::uint64_t v = idx;
    for (std::int64_t i = total_cells - 1; i >= 0; --i) {
      digits[static_cast<std::size_t>(i)] = static_cast<Symbol>(v % rsize);
      v /= rsize;
    }
    auto& row = tl_rowa;
    auto& next = tl_rowb;
    row.assign(base.begin(), base.end());
    std::int64_t digit_base = 0;
    for (std::uint64_t step = 1; step <= t; ++step) {
      const Cell prev_lo = row_lo(step - 1);
      const Cell cur_lo = row_lo(step);
      const std::int64_t cur_len = row_len(step);
      next.resize(static_cast<std::size_t>(cur_len));
      const Symbol* rnd = digits.data() + digit_base;
      for (std::int64_t i = 0; i < cur_len; ++i)
        next[static_cast<std::size_t>(i)] =
            eval_cell(a, cur_lo + i, row.data(), prev_lo, rnd, prev_lo);
      row.swap(next);
      digit_base += row_len(step - 1);
    }
    std::uint64_t out = 0;
    for (std::int64_t j = 0; j < w.L; ++j) out = out * qsize + row[static_cast<std::size_t>(j)];
    return out;
  };

  auto counts = tally_counts(n_random, item, mode);
  return dist_from_counts(a.states(), w, std::move(counts),
                          ipow(BigInt(a.random().size()), static_cast<std::uint64_t>(total_cells)));
}

std::vector<std::uint64_t> nondet_window(const Sca& a, const Word& context, const Window& w,
                                         std::uint64_t t, ExecMode mode) {
  return iter_dist(a, context, w, t, mode).support();
}

std::vector<PeriodicConfig> sample_trajectory(const Sca& a, const PeriodicConfig& c,
                                              std::uint64_t t, std::uint64_t seed) {
  require_state_alphabet(a, c.alphabet, "sample_trajectory");
  std::vector<PeriodicConfig> rows;
  rows.reserve(t + 1);
  rows.push_back(c);
  const std::int64_t p = c.period();
  const std::uint64_t rsize = a.random().size();
  for (std::uint64_t k = 0; k < t; ++k) {
    std::vector<Symbol> rnd(static_cast<std::size_t>(p));
    for (std::int64_t z = 0; z < p; ++z)
      rnd[static_cast<std::size_t>(z)] = counter_symbol(seed, k, z, rsize);
    rows.push_back(apply_explicit(a, rows.back(), PeriodicConfig(a.random(), std::move(rnd))));
  }
  return rows;
}

Rational measure_distance_lb(const std::vector<CylinderDist>& d1,
                             const std::vector<CylinderDist>& d2, int n_max) {
  if (static_cast<int>(d1.size()) <= n_max || static_cast<int>(d2.size()) <= n_max)
    throw DimensionMismatch("measure_distance_lb: need windows up to n_max");
  Rational sum = 0;
  for (int n = 0; n <= n_max; ++n) {
    const CylinderDist& a = d1[static_cast<std::size_t>(n)];
    const CylinderDist& b = d2[static_cast<std::size_t>(n)];
    if (!(a.alphabet() == b.alphabet()) || a.anchor() != -n || b.anchor() != -n ||
        a.length() != 2 * n + 1 || b.length() != 2 * n + 1)
      throw DimensionMismatch("measure_distance_lb: window " + std::to_string(n) +
                              " is not the centered window [-n, n]");
    Rational best = 0;
    const auto consider = [&](std::uint64_t rank) {
      Rational diff = a.weight(rank) - b.weight(rank);
      if (diff < 0) diff = -diff;
      if (diff > best) best = diff;
    };
    for (const auto& [rank, wt] : a.entries()) consider(rank);
    for (const auto& [rank, wt] : b.entries()) consider(rank);
    sum += best * make_fraction(1, ipow(BigInt(2), static_cast<std::uint64_t>(n)));
  }
  return sum;
}

EventWitness event_witness(const Sca& a, const Word& context, const Window& w,
                           const std::vector<Symbol>& target) {
  if (static_cast<std::int64_t>(target.size()) != w.L)
    throw DimensionMismatch("event_witness: target length != window length");
  const int rho = radius(a);
  const Cell lo = w.z - rho;
  const Cell hi = w.z + w.L - 1 + rho;
  if (!context.covers(lo, hi)) throw InsufficientContext("event_witness: context too short");
  const std::int64_t cone = w.L + 2 * rho;
  const std::uint64_t n_random = pow_sat(a.random().size(), static_cast<std::uint64_t>(cone));
  check_budget(n_random, "event_witness cone");

  std::vector<Symbol> states(static_cast<std::size_t>(cone));
  for (std::int64_t i = 0; i < cone; ++i) states[static_cast<std::size_t>(i)] = context.at(lo + i);

  EventWitness ev;
  ev.window_lo = lo;
  ev.window_hi = hi;
  const std::uint64_t rsize = a.random().size();
  std::vector<Symbol> digits(static_cast<std::size_t>(cone));
  for (std::uint64_t idx = 0; idx < n_random; ++idx) {
    std::uint64_t v = idx;
    for (std::int64_t i = cone - 1; i >= 0; --i) {
      digits[static_cast<std::size_t>(i)] = static_cast<Symbol>(v % rsize);
      v /= rsize;
    }
    bool match = true;
    for (std::int64_t j = 0; j < w.L && match; ++j)
      match = eval_cell(a, w.z + j, states.data(), lo, digits.data(), lo) ==
              target[static_cast<std::size_t>(j)];
    if (match) ev.words.push_back(idx);
  }
  return ev;
}

}  // namespace sca
