#include "sca/simulation.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "sca/budget.hpp"
#include "sca/core.hpp"

namespace sca {

bool PrimeSet::intersects(const PrimeSet& other) const {
  for (std::uint64_t p : primes)
    if (std::binary_search(other.primes.begin(), other.primes.end(), p)) return true;
  return false;
}

bool PrimeSet::contains(const PrimeSet& other) const {
  for (std::uint64_t p : other.primes)
    if (!std::binary_search(primes.begin(), primes.end(), p)) return false;
  return true;
}

PrimeSet prime_factors(std::uint64_t n) {
  PrimeSet out;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      out.primes.push_back(p);
      while (n % p == 0) n /= p;
    }
  }
  if (n > 1) out.primes.push_back(n);
  return out;
}

std::string flavor_to_string(const SimFlavor& f) {
  std::string s;
  switch (f.global_kind) {
    case GlobalKind::Deterministic: s = "D"; break;
    case GlobalKind::NonDeterministic: s = "N"; break;
    case GlobalKind::Stochastic: s = "S"; break;
  }
  s += '-';
  switch (f.trim_kind) {
    case TrimFlavor::Injection: s += 'i'; break;
    case TrimFlavor::Projection: s += "pi"; break;
    case TrimFlavor::Mixed: s += 'm'; break;
  }
  return s;
}

SimFlavor flavor_from_string(const std::string& s) {
  const auto dash = s.find('-');
  if (dash == std::string::npos) throw SchemaError("flavor must look like S-i, N-pi, D-m");
  const std::string g = s.substr(0, dash);
  const std::string t = s.substr(dash + 1);
  SimFlavor f;
  if (g == "D") f.global_kind = GlobalKind::Deterministic;
  else if (g == "N") f.global_kind = GlobalKind::NonDeterministic;
  else if (g == "S") f.global_kind = GlobalKind::Stochastic;
  else throw SchemaError("unknown global kind \"" + g + "\"");
  if (t == "i") f.trim_kind = TrimFlavor::Injection;
  else if (t == "pi") f.trim_kind = TrimFlavor::Projection;
  else if (t == "m") f.trim_kind = TrimFlavor::Mixed;
  else throw SchemaError("unknown trim kind \"" + t + "\"");
  return f;
}

std::string obstruction_code(Obstruction o) {
  switch (o) {
    case Obstruction::ExhaustedBounds: return "EXHAUSTED_BOUNDS";
    case Obstruction::PrimeGate: return "PRIME_GATE";
    case Obstruction::DeterministicIdeal: return "DETERMINISTIC_IDEAL";
    case Obstruction::NoisyIdeal: return "NOISY_IDEAL";
  }
  return "?";
}

bool is_deterministic(const Sca& a) { return a.is_deterministic(); }

bool is_noisy_bounded(const Sca& a, std::int64_t max_window, ExecMode mode) {
  const int rho = radius(a);
  for (std::int64_t L = 1; L <= max_window; ++L) {
    const std::int64_t span = L + 2 * rho;
    const std::uint64_t n_ctx = pow_sat(a.states().size(), static_cast<std::uint64_t>(span));
    const std::uint64_t full = pow_sat(a.states().size(), static_cast<std::uint64_t>(L));
    check_budget(n_ctx, "noisy-bounded sweep");
    const auto misses = [&](std::uint64_t ci) {
      const Word ctx(a.states(), word_of_rank(ci, a.states().size(), span), -rho);
      return nondet_window(a, ctx, Window{0, L}, 1, ExecMode::Serial).size() != full;
    };
    if (first_index_where(n_ctx, misses, mode) < n_ctx) return false;
  }
  return true;
}

bool pf_gate(const Sca& a, const Sca& b) {
  if (a.is_deterministic() || b.is_deterministic()) return true;
  return prime_factors(a.random().size()).intersects(prime_factors(b.random().size()));
}

namespace {

// t-step supports of `a` over windows of the given width, all contexts.
bool multi_step_supports_full(const Sca& a, std::int64_t width, std::uint64_t t, ExecMode mode) {
  const int rho = radius(a);
  const std::int64_t span = width + 2 * static_cast<std::int64_t>(t) * rho;
  const std::uint64_t n_ctx = pow_sat(a.states().size(), static_cast<std::uint64_t>(span));
  const std::uint64_t full = pow_sat(a.states().size(), static_cast<std::uint64_t>(width));
  check_budget(n_ctx, "multi-step support sweep");
  const auto misses = [&](std::uint64_t ci) {
    const Word ctx(a.states(), word_of_rank(ci, a.states().size(), span),
                   -static_cast<Cell>(t) * rho);
    return nondet_window(a, ctx, Window{0, width}, t, ExecMode::Serial).size() != full;
  };
  return first_index_where(n_ctx, misses, mode) == n_ctx;
}

EqualityVerdict flavor_equal(GlobalKind kind, const Sca& x, const Sca& y, std::int64_t bound,
                             ExecMode mode) {
  switch (kind) {
    case GlobalKind::Deterministic: return deterministic_equal(x, y, bound, mode);
    case GlobalKind::NonDeterministic: return nondet_equal(x, y, bound, mode);
    case GlobalKind::Stochastic: return one_step_equal(x, y, bound, mode);
  }
  throw Error("unreachable flavor");
}

// Shift enumeration order: 0, -1, +1, -2, +2, ...
std::vector<std::int64_t> shift_order(std::int64_t cap) {
  std::vector<std::int64_t> ks{0};
  for (std::int64_t k = 1; k <= cap; ++k) {
    ks.push_back(-k);
    ks.push_back(k);
  }
  return ks;
}

// Enumerates trims of `rb` matching the flavor, in mapped-symbol-tuple
// order, calling visit(trims, trimmed automaton) until it returns true.
// Returns true when a visit succeeded.
bool for_each_trim(const Sca& rb, std::uint64_t target_states, TrimFlavor kind,
                   const std::function<bool(const std::vector<TrimMap>&, const Sca&)>& visit) {
  const std::uint64_t nb = rb.states().size();
  std::map<std::vector<std::uint64_t>, bool> stable_cache;
  const auto is_stable = [&](const std::vector<std::uint64_t>& sorted_set) {
    auto it = stable_cache.find(sorted_set);
    if (it != stable_cache.end()) return it->second;
    const TrimMap t =
        TrimMap::restriction(std::vector<BigInt>(sorted_set.begin(), sorted_set.end()),
                             BigInt(nb));
    const bool ok = check_restriction(rb, t);
    stable_cache.emplace(sorted_set, ok);
    return ok;
  };

  if (kind == TrimFlavor::Injection) {
    if (target_states > nb) return false;
    const std::uint64_t tuples = pow_sat(nb, target_states);
    check_budget(tuples, "injection enumeration");
    for (std::uint64_t rank = 0; rank < tuples; ++rank) {
      const auto tup = word_of_rank(rank, nb, static_cast<std::int64_t>(target_states));
      std::vector<std::uint64_t> img(tup.begin(), tup.end());
      std::vector<std::uint64_t> sorted = img;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;
      if (!is_stable(sorted)) continue;
      const TrimMap i =
          TrimMap::restriction(std::vector<BigInt>(img.begin(), img.end()), BigInt(nb));
      if (visit({i}, restrict_sca(rb, i))) return true;
    }
    return false;
  }

  if (kind == TrimFlavor::Projection) {
    if (nb < target_states) return false;
    const std::uint64_t tuples = pow_sat(target_states, nb);
    check_budget(tuples, "projection enumeration");
    for (std::uint64_t rank = 0; rank < tuples; ++rank) {
      const auto tup = word_of_rank(rank, target_states, static_cast<std::int64_t>(nb));
      std::set<Symbol> hit(tup.begin(), tup.end());
      if (hit.size() != target_states) continue;
      const TrimMap pi =
          TrimMap::projection(std::vector<BigInt>(tup.begin(), tup.end()), BigInt(target_states));
      if (!check_projection(rb, pi)) continue;
      if (visit({pi}, project_sca(rb, pi))) return true;
    }
    return false;
  }

  // Mixed: projection of a restriction. Stable subsets in ascending-tuple
  // order, then surjections of the restricted automaton.
  if (nb > 20) throw BudgetExceeded("mixed trim enumeration over too many states");
  std::vector<std::vector<std::uint64_t>> subsets;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << nb); ++mask) {
    if (static_cast<std::uint64_t>(__builtin_popcountll(mask)) < target_states) continue;
    std::vector<std::uint64_t> set;
    for (std::uint64_t q = 0; q < nb; ++q)
      if (mask & (std::uint64_t{1} << q)) set.push_back(q);
    subsets.push_back(std::move(set));
  }
  std::sort(subsets.begin(), subsets.end());
  for (const auto& set : subsets) {
    if (!is_stable(set)) continue;
    const TrimMap i =
        TrimMap::restriction(std::vector<BigInt>(set.begin(), set.end()), BigInt(nb));
    const Sca restricted = restrict_sca(rb, i);
    const std::uint64_t tuples = pow_sat(target_states, set.size());
    check_budget(tuples, "mixed surjection enumeration");
    for (std::uint64_t rank = 0; rank < tuples; ++rank) {
      const auto tup = word_of_rank(rank, target_states, static_cast<std::int64_t>(set.size()));
      std::set<Symbol> hit(tup.begin(), tup.end());
      if (hit.size() != target_states) continue;
      const TrimMap pi =
          TrimMap::projection(std::vector<BigInt>(tup.begin(), tup.end()), BigInt(target_states));
      if (!check_projection(restricted, pi)) continue;
      if (visit({i, pi}, project_sca(restricted, pi))) return true;
    }
  }
  return false;
}

}  // namespace

SearchResult search_simulation(const Sca& a, const Sca& b, const SimFlavor& flavor,
                               const SimBounds& bounds, ExecMode mode) {
  SearchResult res;

  if (flavor.global_kind != GlobalKind::Deterministic) {
    const bool a_det = a.is_deterministic();
    const bool b_det = b.is_deterministic();
    // Prime-factor gate: sound disproof for stochastic flavors.
    if (flavor.global_kind == GlobalKind::Stochastic && !a_det && !b_det && !pf_gate(a, b)) {
      res.obstruction = Obstruction::PrimeGate;
      return res;
    }
    // Deterministic ideal: rescalings and trims of a deterministic b stay
    // deterministic; rescalings of a non-deterministic a never are.
    if (b_det && !a_det) {
      res.obstruction = Obstruction::DeterministicIdeal;
      return res;
    }
    // Noisy ideal. If b has full one-step supports at width m_cap *
    // max_window, every rescaled-and-trimmed b within caps keeps full
    // supports at the swept windows; equality then forces the same of the
    // rescaled a. Disproof when every a-rescaling misses a word somewhere.
    if (!b_det) {
      bool fires = false;
      try {
        if (is_noisy_bounded(b, static_cast<std::int64_t>(bounds.m_cap) * bounds.max_window,
                             mode)) {
          fires = true;
          for (std::uint64_t m1 = 1; m1 <= bounds.m_cap && fires; ++m1)
            for (std::uint64_t t1 = 1; t1 <= bounds.t_cap && fires; ++t1) {
              bool all_windows_fail = false;
              for (std::int64_t L = 1; L <= bounds.max_window && !all_windows_fail; ++L) {
                if (!multi_step_supports_full(a, static_cast<std::int64_t>(m1) * L, t1, mode))
                  all_windows_fail = true;
              }
              if (!all_windows_fail) fires = false;
            }
        }
      } catch (const BudgetExceeded&) {
        fires = false;  // pruning is optional; fall through to the search
      }
      if (fires) {
        res.obstruction = Obstruction::NoisyIdeal;
        return res;
      }
    }
  }

  std::map<std::tuple<std::uint64_t, std::uint64_t, std::int64_t>, Sca> cache_a, cache_b;
  const auto rescaled = [&](const Sca& x, auto& cache, std::uint64_t m, std::uint64_t t,
                            std::int64_t k) -> const Sca& {
    const auto key = std::make_tuple(m, t, k);
    auto it = cache.find(key);
    if (it == cache.end())
      it = cache.emplace(key, rescale(x, RescaleParams{m, t, k}, mode)).first;
    return it->second;
  };

  const auto ks = shift_order(bounds.k_cap);
  for (std::uint64_t m2 = 1; m2 <= bounds.m_cap; ++m2)
    for (std::uint64_t t2 = 1; t2 <= bounds.t_cap; ++t2)
      for (std::int64_t k2 : ks)
        for (std::uint64_t m1 = 1; m1 <= bounds.m_cap; ++m1)
          for (std::uint64_t t1 = 1; t1 <= bounds.t_cap; ++t1)
            for (std::int64_t k1 : ks) {
              const Sca& ra = rescaled(a, cache_a, m1, t1, k1);
              const Sca& rb = rescaled(b, cache_b, m2, t2, k2);
              ++res.candidates_checked;
              if (flavor.global_kind != GlobalKind::Deterministic) {
                // Candidate-level sound skips.
                if (rb.is_deterministic() && !ra.is_deterministic()) continue;
              }
              const auto visit = [&](const std::vector<TrimMap>& trims, const Sca& cand) {
                if (!flavor_equal(flavor.global_kind, ra, cand, bounds.max_window, mode).equal())
                  return false;
                SimWitness w;
                w.left = RescaleParams{m1, t1, k1};
                w.right = RescaleParams{m2, t2, k2};
                w.trims = trims;
                w.verified_bound = bounds.max_window;
                w.flavor = flavor;
                res.witness = std::move(w);
                return true;
              };
              if (for_each_trim(rb, ra.states().size(), flavor.trim_kind, visit)) return res;
            }
  res.obstruction = Obstruction::ExhaustedBounds;
  return res;
}

bool verify_witness(const Sca& a, const Sca& b, const SimFlavor& flavor, const SimWitness& w,
                    ExecMode mode) {
  const Sca ra = rescale(a, w.left, mode);
  Sca cand = rescale(b, w.right, mode);
  for (const TrimMap& t : w.trims) {
    t.validate("verify_witness");
    try {
      cand = t.kind == TrimKind::Restriction ? restrict_sca(cand, t) : project_sca(cand, t);
    } catch (const UnstableRestriction&) {
      return false;
    } catch (const IncompatibleProjection&) {
      return false;
    }
  }
  if (cand.states().size() != ra.states().size()) return false;
  return flavor_equal(flavor.global_kind, ra, cand, w.verified_bound, mode).equal();
}

}  // namespace sca
