#pragma once

// Shared fixture automata and a seeded instance generator for the test
// suites. Everything here is deterministic: generators take explicit seeds.

#include <vector>

#include "sca/constructions.hpp"
#include "sca/rng.hpp"
#include "sca/sca.hpp"
#include "sca/word.hpp"

namespace sca::testing {

inline Alphabet binary() { return Alphabet(2, {"0", "1"}); }

/// F(c,s) = s over Q = R = {0,1}.
inline Sca noise_ca() {
  return make_sca(binary(), binary(), Neighborhood{0}, Neighborhood{0},
                  [](const std::vector<Symbol>&, const std::vector<Symbol>& s) { return s[0]; },
                  "noise");
}

/// F(c,s) = c.
inline Sca identity_ca() {
  return make_sca(binary(), binary(), Neighborhood{0}, Neighborhood{0},
                  [](const std::vector<Symbol>& c, const std::vector<Symbol>&) { return c[0]; },
                  "identity");
}

/// F(c)_z = c_{z+1}.
inline Sca shift_ca() {
  return make_sca(binary(), binary(), Neighborhood{1}, Neighborhood{0},
                  [](const std::vector<Symbol>& c, const std::vector<Symbol>&) { return c[0]; },
                  "shift");
}

/// F(c)_z = c_z xor c_{z+1} (deterministic, surjective).
inline Sca xor_det_ca() {
  return make_sca(binary(), binary(), Neighborhood{0, 1}, Neighborhood{0},
                  [](const std::vector<Symbol>& c, const std::vector<Symbol>&) -> Symbol {
                    return (c[0] ^ c[1]) & 1u;
                  },
                  "xor-det");
}

inline Sca constant0_ca() {
  return make_sca(binary(), binary(), Neighborhood{0}, Neighborhood{0},
                  [](const std::vector<Symbol>&, const std::vector<Symbol>&) -> Symbol { return 0; },
                  "constant0");
}

/// Noise with three random symbols folded onto two states: weights 2/3, 1/3.
inline Sca biased_noise3_ca() {
  return make_sca(binary(), Alphabet(3, {"0", "1", "2"}), Neighborhood{0}, Neighborhood{0},
                  [](const std::vector<Symbol>&, const std::vector<Symbol>& s) -> Symbol {
                    return s[0] == 1 ? 1 : 0;
                  },
                  "biased-noise3");
}

/// Uniform noise over Q = R = {0,1,2}.
inline Sca noise3_ca() {
  const Alphabet t(3, {"0", "1", "2"});
  return make_sca(t, t, Neighborhood{0}, Neighborhood{0},
                  [](const std::vector<Symbol>&, const std::vector<Symbol>& s) { return s[0]; },
                  "noise3");
}

/// Seeded random automaton with |Q|,|R| <= 3 and radius <= 1. Used by the
/// oracle-equivalence and acceptance sweeps.
inline Sca random_sca(std::uint64_t seed) {
  SplitMix g(seed);
  const std::uint64_t nq = 2 + g.below(2);  // 2..3
  const std::uint64_t nr = 2 + g.below(2);
  const auto pick_nbr = [&]() {
    std::vector<int> offs;
    for (int v = -1; v <= 1; ++v)
      if (g.below(2)) offs.push_back(v);
    if (offs.empty()) offs.push_back(0);
    return Neighborhood(offs);
  };
  const Neighborhood nbr = pick_nbr();
  const Neighborhood rnd_nbr = pick_nbr();
  const std::uint64_t entries =
      pow_sat(nq, nbr.size()) * pow_sat(nr, rnd_nbr.size());
  std::vector<Symbol> table(entries);
  for (auto& e : table) e = static_cast<Symbol>(g.below(nq));
  return Sca(Alphabet(nq), Alphabet(nr), nbr, rnd_nbr, std::move(table),
             "random-" + std::to_string(seed));
}

/// Context word of `fill` repeated over [lo, lo+len).
inline Word const_word(const Alphabet& a, Symbol fill, Cell lo, std::int64_t len) {
  return Word(a, std::vector<Symbol>(static_cast<std::size_t>(len), fill), lo);
}

/// Parse a word over single-character symbol names.
inline Word parse_word(const Alphabet& a, const std::string& chars, Cell anchor) {
  std::vector<Symbol> syms;
  for (char ch : chars) syms.push_back(a.symbol_of(std::string(1, ch)));
  return Word(a, std::move(syms), anchor);
}

inline PeriodicConfig parse_config(const Alphabet& a, const std::string& chars) {
  std::vector<Symbol> syms;
  for (char ch : chars) syms.push_back(a.symbol_of(std::string(1, ch)));
  return PeriodicConfig(a, std::move(syms));
}

}  // namespace sca::testing
