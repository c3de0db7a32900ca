#pragma once

#include <cstdint>
#include <vector>

#include "sca/dist.hpp"
#include "sca/enumerate.hpp"
#include "sca/kernel.hpp"
#include "sca/sca.hpp"
#include "sca/word.hpp"

namespace sca {

/// One application of the explicit global function F(c, s). The result has
/// period lcm(period(c), period(s)).
PeriodicConfig apply_explicit(const Sca& a, const PeriodicConfig& c, const PeriodicConfig& s);

/// Deterministic global function F(c) = F(c, 0^Z); the distinguished random
/// symbol is index 0.
PeriodicConfig apply_deterministic(const Sca& a, const PeriodicConfig& c);

/// Left fold of apply_explicit over the random sequence; t = 0 returns c.
PeriodicConfig iterate_explicit(const Sca& a, const PeriodicConfig& c, const RandomSeq& ss);

/// Exact one-step output distribution on window cells [w.z, w.z + w.L).
/// Context must cover [w.z - rho, w.z + w.L - 1 + rho]; each weight is
/// |J_u| / |R|^(L + 2 rho).
CylinderDist one_step_dist(const Sca& a, const Word& context, const Window& w,
                           ExecMode mode = default_exec_mode());

/// t-step distribution via the iterate recursion
///   S^{t+1}(c)([u]_z) = sum_v S^t(c)([v]_a) * S(c_v)([u]_z)
/// with c_v the context overwritten by v on the inner window. Works over any
/// window kernel so rescaled automata can be iterated without tables.
CylinderDist iterate_dist(const WindowKernel& k, const Word& context, const Window& w,
                          std::uint64_t t, ExecMode mode = default_exec_mode());

CylinderDist iter_dist(const Sca& a, const Word& context, const Window& w, std::uint64_t t,
                       ExecMode mode = default_exec_mode());

/// Oracle for iter_dist: enumerates every t-tuple of random words over the
/// step-by-step dependence cones and evaluates F^t directly. Refuses above
/// the enumeration budget.
CylinderDist iter_dist_bruteforce(const Sca& a, const Word& context, const Window& w,
                                  std::uint64_t t, ExecMode mode = default_exec_mode());

/// Support of the t-step distribution: the non-deterministic window
/// {F^t(c, s...)|_w}. Ranks are sorted.
std::vector<std::uint64_t> nondet_window(const Sca& a, const Word& context, const Window& w,
                                         std::uint64_t t, ExecMode mode = default_exec_mode());

/// Monte Carlo companion: t+1 rows, row 0 = c, randomness drawn by the
/// counter-based generator from (seed, step, cell). Bit-reproducible for a
/// fixed seed regardless of execution order.
std::vector<PeriodicConfig> sample_trajectory(const Sca& a, const PeriodicConfig& c,
                                              std::uint64_t t, std::uint64_t seed);

/// Truncated measure distance: sum_{n <= n_max} 2^-n max_u |d1[n] - d2[n]|
/// over centered windows [-n, n]. A lower bound on the full distance.
Rational measure_distance_lb(const std::vector<CylinderDist>& d1,
                             const std::vector<CylinderDist>& d2, int n_max);

/// The event set behind one_step_dist's weight for `target`: every random
/// word on the cone mapping `context` into the target cylinder.
EventWitness event_witness(const Sca& a, const Word& context, const Window& w,
                           const std::vector<Symbol>& target);

}  // namespace sca
