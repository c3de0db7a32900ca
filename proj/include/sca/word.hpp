#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "sca/alphabet.hpp"
#include "sca/errors.hpp"

namespace sca {

using Cell = std::int64_t;

/// Finite anchored word: symbol i sits at lattice position anchor + i.
/// Stands in for a cylinder [u]_z and for context fragments of configurations.
struct Word {
  Alphabet alphabet;
  std::vector<Symbol> symbols;
  Cell anchor = 0;

  Word() = default;
  Word(Alphabet a, std::vector<Symbol> syms, Cell z)
      : alphabet(std::move(a)), symbols(std::move(syms)), anchor(z) {
    for (Symbol s : symbols)
      if (s >= alphabet.size()) throw Error("word symbol out of alphabet range");
  }

  std::int64_t length() const { return static_cast<std::int64_t>(symbols.size()); }
  Cell begin_pos() const { return anchor; }
  Cell end_pos() const { return anchor + length(); }  // one past last

  bool covers(Cell lo, Cell hi_inclusive) const {
    return anchor <= lo && hi_inclusive < end_pos();
  }

  Symbol at(Cell z) const {
    if (z < anchor || z >= end_pos()) throw InsufficientContext("position outside context word");
    return symbols[static_cast<std::size_t>(z - anchor)];
  }

  /// Copy with positions [lo, lo+len) (must be covered).
  Word slice(Cell lo, std::int64_t len) const {
    if (!covers(lo, lo + len - 1)) throw InsufficientContext("slice outside context word");
    std::vector<Symbol> out(symbols.begin() + (lo - anchor), symbols.begin() + (lo - anchor) + len);
    return Word(alphabet, std::move(out), lo);
  }

  /// Copy with `patch` overwriting positions [patch.anchor, patch.end_pos()).
  Word overwrite(const Word& patch) const {
    Word out = *this;
    for (Cell z = patch.begin_pos(); z < patch.end_pos(); ++z) {
      if (z >= anchor && z < end_pos()) out.symbols[static_cast<std::size_t>(z - anchor)] = patch.at(z);
    }
    return out;
  }

  /// Like overwrite, but widened to the hull of both spans so the patch may
  /// extend past this word. Cells covered by neither word (possible when the
  /// spans are disjoint) are filled with symbol 0; callers only read inside
  /// the patch span in that case.
  Word overwrite_extend(const Word& patch) const {
    const Cell lo = std::min(anchor, patch.begin_pos());
    const Cell hi = std::max(end_pos(), patch.end_pos());
    std::vector<Symbol> out(static_cast<std::size_t>(hi - lo), 0);
    for (Cell z = anchor; z < end_pos(); ++z)
      out[static_cast<std::size_t>(z - lo)] = symbols[static_cast<std::size_t>(z - anchor)];
    for (Cell z = patch.begin_pos(); z < patch.end_pos(); ++z)
      out[static_cast<std::size_t>(z - lo)] = patch.at(z);
    return Word(alphabet, std::move(out), lo);
  }

  friend bool operator==(const Word& a, const Word& b) {
    return a.alphabet == b.alphabet && a.anchor == b.anchor && a.symbols == b.symbols;
  }
};

/// Bi-infinite periodic configuration: cell z holds period_word[z mod p].
/// Stand-in for arbitrary configurations on the integer lattice; exact
/// whenever the period exceeds the dependence width of the operation at hand.
struct PeriodicConfig {
  Alphabet alphabet;
  std::vector<Symbol> period_word;

  PeriodicConfig() = default;
  PeriodicConfig(Alphabet a, std::vector<Symbol> w)
      : alphabet(std::move(a)), period_word(std::move(w)) {
    if (period_word.empty()) throw Error("periodic configuration needs period >= 1");
    for (Symbol s : period_word)
      if (s >= alphabet.size()) throw Error("config symbol out of alphabet range");
  }

  std::int64_t period() const { return static_cast<std::int64_t>(period_word.size()); }

  Symbol at(Cell z) const {
    const std::int64_t p = period();
    std::int64_t m = z % p;
    if (m < 0) m += p;
    return period_word[static_cast<std::size_t>(m)];
  }

  Word window(Cell lo, std::int64_t len) const {
    std::vector<Symbol> out;
    out.reserve(static_cast<std::size_t>(len));
    for (std::int64_t i = 0; i < len; ++i) out.push_back(at(lo + i));
    return Word(alphabet, std::move(out), lo);
  }

  // Equality of the bi-infinite configurations, not of period words: "01"
  // and "0101" denote the same configuration.
  friend bool operator==(const PeriodicConfig& a, const PeriodicConfig& b) {
    if (!(a.alphabet == b.alphabet)) return false;
    const std::int64_t p = std::lcm(a.period(), b.period());
    for (std::int64_t z = 0; z < p; ++z)
      if (a.at(z) != b.at(z)) return false;
    return true;
  }
};

/// One random configuration per time step, all over the same random alphabet.
struct RandomSeq {
  std::vector<PeriodicConfig> steps;

  RandomSeq() = default;
  explicit RandomSeq(std::vector<PeriodicConfig> s) : steps(std::move(s)) {
    for (std::size_t i = 1; i < steps.size(); ++i)
      if (!(steps[i].alphabet == steps[0].alphabet))
        throw AlphabetMismatch("random sequence steps over different alphabets");
  }

  std::size_t size() const { return steps.size(); }
};

// Big-endian ranking of fixed-length words: first symbol most significant.
// The same convention indexes rule tables, distributions and couplings.
inline std::uint64_t rank_of_word(const std::vector<Symbol>& w, std::uint64_t alphabet_size) {
  std::uint64_t r = 0;
  for (Symbol s : w) r = r * alphabet_size + s;
  return r;
}

inline std::vector<Symbol> word_of_rank(std::uint64_t rank, std::uint64_t alphabet_size,
                                        std::int64_t length) {
  std::vector<Symbol> w(static_cast<std::size_t>(length), 0);
  for (std::int64_t i = length - 1; i >= 0; --i) {
    w[static_cast<std::size_t>(i)] = static_cast<Symbol>(rank % alphabet_size);
    rank /= alphabet_size;
  }
  return w;
}

inline std::int64_t lcm_period(std::int64_t a, std::int64_t b) {
  return std::lcm(a, b);
}

/// Render a word's symbols (no anchor) using alphabet names; single-char
/// alphabets concatenate, otherwise symbols are comma-separated.
inline std::string format_symbols(const Alphabet& alph, const std::vector<Symbol>& syms) {
  std::string out;
  const bool compact = alph.single_char_names();
  for (std::size_t i = 0; i < syms.size(); ++i) {
    if (!compact && i > 0) out += ',';
    out += alph.name_of(syms[i]);
  }
  return out;
}

}  // namespace sca
