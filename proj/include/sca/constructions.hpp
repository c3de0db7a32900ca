#pragma once

#include <cstdint>
#include <vector>

#include "sca/equivalence.hpp"
#include "sca/sca.hpp"
#include "sca/simulation.hpp"
#include "sca/transform.hpp"

namespace sca {

/// The Parity automaton: Q = {#,0,1}, R = {0,1}, V = {-1,0,1}, V' = {-1,0}.
/// Every maximal {0,1}-segment between # markers maps to an independent
/// uniform word of even parity. State indices: 0 = '#', 1 = '0', 2 = '1'.
Sca parity_sca();

inline constexpr Symbol kParityHash = 0;
inline constexpr Symbol kParityZero = 1;
inline constexpr Symbol kParityOne = 2;

/// The two faces of the blank-noise automaton over Q = R = {0,1}, V = V' =
/// {0}: first F(c,s) = s, second G(c,s) = c + s mod 2.
std::pair<Sca, Sca> blank_noise_pair();

/// The configuration-dependent coupling of the blank-noise pair at the cell
/// of the context's anchor window: weight 1/2 exactly on the pairs (a, b)
/// with a = b + c_0 mod 2. verify_coupling accepts it.
Coupling blank_noise_coupling(const Word& context);

/// Plain-PCA embedding: b has states Q plus QxR; phase one stores each
/// cell's fresh random symbol beside its state, phase two applies a's rule
/// reading the stored symbols. The witness asserts a embedded in b rescaled
/// (1,2,0) under the identity injection.
struct PcaEmbedding {
  Sca b;
  TrimMap injection;
  SimWitness witness;
};
PcaEmbedding pca_embed(const Sca& a);

/// Width and value-mod map for generating one R-symbol from w fresh
/// R_U-symbols: smallest width w with source^w >= target, strengthened to
/// target | source^w when the prime support allows; uniform exactly then.
struct SymbolGenMap {
  std::uint64_t source_size = 2;
  std::uint64_t target_size = 1;
  std::uint64_t width = 1;
  bool uniform = false;

  Symbol apply(const std::vector<Symbol>& raw) const {
    std::uint64_t v = 0;
    for (Symbol d : raw) v = v * source_size + d;
    return static_cast<Symbol>(v % target_size);
  }
};
SymbolGenMap rand_symbol_map(std::uint64_t target, std::uint64_t source);

struct FieldSpan {
  std::int64_t start = 0;
  std::int64_t width = 0;
};

/// Block geometry and machine constants for simulating one automaton on the
/// universal PCA. Only widths and tape contents vary with the simulated
/// automaton; the machine's alphabet and head program are fixed by P.
struct UniversalLayout {
  std::uint64_t m = 0;    // block width in cells
  std::uint64_t t_u = 0;  // machine steps per simulated step
  FieldSpan sync, table, qstate, rsym, nbr_q, nbr_r;
  int base = 2;  // payload digit base for state encodings

  std::uint64_t d = 2;   // |R_U|
  std::uint64_t qw = 1;  // digits per state
  std::uint64_t w = 1;   // raw digits per generated R-symbol
  std::uint64_t c1 = 1, c3 = 1;  // countdown masters (ticks)
  std::vector<int> v, v_prime;   // normalized ascending neighborhoods
  SymbolGenMap gen;
  Sca normalized;  // the simulated automaton, neighborhoods normalized

  /// (step, in-block cell) of each random draw within one cycle.
  std::vector<std::pair<std::uint64_t, std::int64_t>> gen_schedule;
};

/// The universal machine for prime set P: a plain PCA of radius 1 with
/// |R_U| = product of P. Fixed alphabet and head program; function-backed
/// rule (its flat table would dwarf any budget).
struct UniversalFamily {
  Sca u;
  PrimeSet primes;
  std::uint64_t d = 2;
};
UniversalFamily universal_pca(const PrimeSet& p);

struct UniversalEncoding {
  UniversalLayout layout;
  TrimMap injection;  // state -> packed rank of its canonical clean block
  SimWitness witness;
};

/// Computes the block layout for `a` (radius <= 1), the canonical-block
/// injection, and the simulation witness: non-deterministic always,
/// stochastic exactly when PF(|R|) is contained in P.
UniversalEncoding encode_into_universal(const Sca& a, const UniversalFamily& u);

/// Canonical clean block for state q, as machine cells.
std::vector<Symbol> canonical_block(const UniversalFamily& u, const UniversalLayout& layout,
                                    Symbol q);

/// Encode a state word as consecutive canonical blocks / decode it back
/// (strict: every block must be exactly canonical).
std::vector<Symbol> encode_config(const UniversalFamily& u, const UniversalLayout& layout,
                                  const std::vector<Symbol>& states);
std::vector<Symbol> decode_config(const UniversalFamily& u, const UniversalLayout& layout,
                                  const std::vector<Symbol>& cells);

/// Exhaustive one-cycle block-map extraction on 3-block rings: runs the
/// machine over every state triple and every raw triple with the randomness
/// injected at the generation schedule, asserts the head discipline (one
/// head per block at pairwise distance m, simultaneous return home) and
/// clean-block canonicity, and returns the induced automaton
/// (Q, D^w, V, V', T). Throws Error on any discipline violation.
Sca extract_block_automaton(const UniversalFamily& u, const UniversalLayout& layout,
                            ExecMode mode = default_exec_mode());

/// Decoded-distribution verdicts of the universal witness at windows
/// L <= max_window: compares the simulated automaton against the extracted
/// block automaton with the flavor's equality.
bool verify_universal_witness(const UniversalFamily& u, const UniversalEncoding& enc,
                              GlobalKind kind, std::int64_t max_window = 2,
                              ExecMode mode = default_exec_mode());

}  // namespace sca
