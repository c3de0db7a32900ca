#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "sca/core.hpp"
#include "sca/kernel.hpp"
#include "sca/sca.hpp"

namespace sca {

struct EqualityWitness {
  Word context;
  Window window;
  std::uint64_t word_rank = 0;
  Rational left;
  Rational right;
};

/// Verdict of a bounded equality sweep. EqualUpToBound never claims more
/// than the windows it exhausted.
struct EqualityVerdict {
  enum class Status { EqualUpToBound, Unequal };
  Status status = Status::EqualUpToBound;
  std::int64_t max_window = 0;
  std::uint64_t contexts_checked = 0;
  std::optional<EqualityWitness> witness;

  bool equal() const { return status == Status::EqualUpToBound; }
};

/// Compares exact one-step distributions of two automata with the same state
/// alphabet over every window length L <= max_window and every context of
/// length L + 2*max(rho) anchored at -rho. Equality here extends to all
/// t-step bounded distributions on those windows.
EqualityVerdict one_step_equal(const Sca& a, const Sca& b, std::int64_t max_window,
                               ExecMode mode = default_exec_mode());

/// Same sweep comparing supports instead of weights.
EqualityVerdict nondet_equal(const Sca& a, const Sca& b, std::int64_t max_window,
                             ExecMode mode = default_exec_mode());

/// Kernel-level variants, used for rescaled automata without tables.
EqualityVerdict one_step_equal(const WindowKernel& a, const WindowKernel& b,
                               std::int64_t max_window, ExecMode mode = default_exec_mode());
EqualityVerdict nondet_equal(const WindowKernel& a, const WindowKernel& b,
                             std::int64_t max_window, ExecMode mode = default_exec_mode());

/// Deterministic-map sweep: compares F(c, 0^Z) images on the same windows.
EqualityVerdict deterministic_equal(const Sca& a, const Sca& b, std::int64_t max_window,
                                    ExecMode mode = default_exec_mode());

/// Finite-support coupling of the two uniform random sources at one level n:
/// words of the common width 2(n+rho)+1. Weights sum to 1 and both marginals
/// are exactly uniform.
struct Coupling {
  Alphabet left_alphabet;
  Alphabet right_alphabet;
  std::int64_t width = 1;
  std::vector<std::pair<std::pair<std::uint64_t, std::uint64_t>, Rational>> entries;

  Rational weight(std::uint64_t v1, std::uint64_t v2) const;
};

/// Rank-interval coupling construction at level n for the centered window
/// [-n, n]: partitions [0,1) per output word into lexicographic rank
/// intervals and weighs pairs by interval intersection. Returns the
/// inequality witness instead when the two window distributions differ.
std::variant<Coupling, EqualityVerdict> build_coupling(const Sca& a, const Sca& b,
                                                       const Word& context, std::int64_t n,
                                                       ExecMode mode = default_exec_mode());

/// Checks the two coupling conditions: uniform marginals, and almost-sure
/// agreement of the two images on the centered window.
bool verify_coupling(const Sca& a, const Sca& b, const Word& context, const Coupling& g);

/// Reduction automaton of a deterministic CA: G(c, s) = F(s), with R = Q and
/// the random neighborhood a copy of a's state neighborhood. Its one-step
/// distribution at any context is the image measure of the uniform measure
/// under F.
Sca lift_to_noise(const Sca& a);

struct UniformityVerdict {
  bool uniform = true;
  std::uint64_t contexts_checked = 0;
  std::optional<EqualityWitness> witness;
};

/// True iff one_step_dist is uniform for every context and window length
/// L <= max_window. On noise-lifted automata this is the bounded
/// surjectivity test.
UniformityVerdict uniformity_check(const Sca& a, std::int64_t max_window,
                                   ExecMode mode = default_exec_mode());

}  // namespace sca
