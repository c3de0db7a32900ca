#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sca/equivalence.hpp"
#include "sca/sca.hpp"
#include "sca/transform.hpp"

namespace sca {

struct PrimeSet {
  std::vector<std::uint64_t> primes;  // sorted, distinct

  bool intersects(const PrimeSet& other) const;
  bool contains(const PrimeSet& other) const;  // other subset of this
};

/// Prime support of n; PF(1) is empty.
PrimeSet prime_factors(std::uint64_t n);

enum class GlobalKind { Deterministic, NonDeterministic, Stochastic };
enum class TrimFlavor { Injection, Projection, Mixed };

/// One of the nine simulation relations: which global maps are compared and
/// which trimming shape the simulator side may use.
struct SimFlavor {
  GlobalKind global_kind = GlobalKind::Stochastic;
  TrimFlavor trim_kind = TrimFlavor::Injection;
};

/// "S-i", "N-pi", "D-m", ...
std::string flavor_to_string(const SimFlavor& f);
SimFlavor flavor_from_string(const std::string& s);

struct SimBounds {
  std::uint64_t m_cap = 2;
  std::uint64_t t_cap = 2;
  std::int64_t k_cap = 1;
  std::int64_t max_window = 2;
};

/// Certificate that rescale(a, left) equals trim(rescale(b, right)) under
/// the flavor's bounded equality at verified_bound. Trims apply to the
/// rescaled right automaton in order (restriction first for mixed).
struct SimWitness {
  RescaleParams left;
  RescaleParams right;
  std::vector<TrimMap> trims;
  std::int64_t verified_bound = 0;
  SimFlavor flavor;
};

enum class Obstruction {
  ExhaustedBounds,      // no disproof, just no witness within the caps
  PrimeGate,            // disjoint prime supports: no stochastic simulation
  DeterministicIdeal,   // b deterministic, a not: no N/S simulation
  NoisyIdeal,           // b noisy at the transported bound, a provably not
};

std::string obstruction_code(Obstruction o);

struct SearchResult {
  std::optional<SimWitness> witness;
  Obstruction obstruction = Obstruction::ExhaustedBounds;
  std::uint64_t candidates_checked = 0;

  bool found() const { return witness.has_value(); }
};

/// Free-function face of Sca::is_deterministic.
bool is_deterministic(const Sca& a);

/// True iff every context sees the full word set on every window L <=
/// max_window (one-step supports).
bool is_noisy_bounded(const Sca& a, std::int64_t max_window,
                      ExecMode mode = default_exec_mode());

/// Returns false only when both automata are non-deterministic and their
/// random alphabets have disjoint prime supports; false certifies that no
/// stochastic simulation relation can hold in either direction.
bool pf_gate(const Sca& a, const Sca& b);

/// Bounded search for `a simulated by b` under the flavor: enumerates
/// rescalings of both sides (lexicographic over (m2, t2, |k2|, m1, t1,
/// |k1|), negative shift first), then admissible trims of the rescaled b
/// ordered by mapped-symbol tuples, and returns the first candidate passing
/// the flavor's bounded equality. Sound prunes (prime gate, deterministic /
/// noisy ideals) may return a disproof obstruction instead.
SearchResult search_simulation(const Sca& a, const Sca& b, const SimFlavor& flavor,
                               const SimBounds& bounds, ExecMode mode = default_exec_mode());

/// Reconstructs both sides of a witness and re-runs the flavor's bounded
/// equality at witness.verified_bound. Structurally malformed trims throw
/// InapplicableTrim; failed stability/compatibility or equality returns
/// false.
bool verify_witness(const Sca& a, const Sca& b, const SimFlavor& flavor, const SimWitness& w,
                    ExecMode mode = default_exec_mode());

}  // namespace sca
