#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sca/alphabet.hpp"
#include "sca/budget.hpp"
#include "sca/rational.hpp"
#include "sca/word.hpp"

namespace sca {

/// Output window: cells [z, z+L).
struct Window {
  Cell z = 0;
  std::int64_t L = 1;
};

/// Exact distribution over all words of a fixed window. Stored sparsely
/// (zero-weight words omitted) but semantically total; entries are kept
/// sorted by word rank so results are identical regardless of how they were
/// accumulated.
class CylinderDist {
 public:
  CylinderDist() = default;
  CylinderDist(Alphabet alphabet, Cell anchor, std::int64_t length,
               std::vector<std::pair<std::uint64_t, Rational>> weights)
      : alphabet_(std::move(alphabet)), anchor_(anchor), length_(length), weights_(std::move(weights)) {
    std::sort(weights_.begin(), weights_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [rank, w] : weights_) {
      if (w < 0 || w > 1) throw Error("cylinder weight outside [0,1]");
    }
  }

  static CylinderDist point_mass(const Word& w) {
    return CylinderDist(w.alphabet, w.anchor, w.length(),
                        {{rank_of_word(w.symbols, w.alphabet.size()), Rational(1)}});
  }

  const Alphabet& alphabet() const { return alphabet_; }
  Cell anchor() const { return anchor_; }
  std::int64_t length() const { return length_; }
  const std::vector<std::pair<std::uint64_t, Rational>>& entries() const { return weights_; }

  Rational weight(std::uint64_t rank) const {
    auto it = std::lower_bound(weights_.begin(), weights_.end(), rank,
                               [](const auto& e, std::uint64_t r) { return e.first < r; });
    if (it != weights_.end() && it->first == rank) return it->second;
    return Rational(0);
  }

  Rational weight(const std::vector<Symbol>& word) const {
    return weight(rank_of_word(word, alphabet_.size()));
  }

  Rational total() const {
    Rational s = 0;
    for (const auto& [rank, w] : weights_) s += w;
    return s;
  }

  std::vector<std::uint64_t> support() const {
    std::vector<std::uint64_t> out;
    for (const auto& [rank, w] : weights_)
      if (w != 0) out.push_back(rank);
    return out;
  }

  bool is_uniform() const {
    const std::uint64_t n = pow_sat(alphabet_.size(), static_cast<std::uint64_t>(length_));
    if (weights_.size() != n) return false;
    const Rational u = make_fraction(1, BigInt(n));
    for (const auto& [rank, w] : weights_)
      if (w != u) return false;
    return true;
  }

  /// Marginal over the window shortened by one cell on the right: sums out
  /// the last symbol (the cylinder consistency identity).
  CylinderDist drop_last() const {
    std::map<std::uint64_t, Rational> acc;
    const std::uint64_t a = alphabet_.size();
    for (const auto& [rank, w] : weights_) acc[rank / a] += w;
    std::vector<std::pair<std::uint64_t, Rational>> out(acc.begin(), acc.end());
    return CylinderDist(alphabet_, anchor_, length_ - 1, std::move(out));
  }

  /// Marginal dropping the first cell.
  CylinderDist drop_first() const {
    std::map<std::uint64_t, Rational> acc;
    const std::uint64_t tail =
        pow_sat(alphabet_.size(), static_cast<std::uint64_t>(length_ - 1));
    for (const auto& [rank, w] : weights_) acc[rank % tail] += w;
    std::vector<std::pair<std::uint64_t, Rational>> out(acc.begin(), acc.end());
    return CylinderDist(alphabet_, anchor_ + 1, length_ - 1, std::move(out));
  }

  friend bool operator==(const CylinderDist& a, const CylinderDist& b) {
    if (!(a.alphabet_ == b.alphabet_) || a.anchor_ != b.anchor_ || a.length_ != b.length_)
      return false;
    // Zero-weight entries are normalized away on construction paths, but be
    // safe and compare as total maps.
    auto ia = a.weights_.begin();
    auto ib = b.weights_.begin();
    while (ia != a.weights_.end() || ib != b.weights_.end()) {
      while (ia != a.weights_.end() && ia->second == 0) ++ia;
      while (ib != b.weights_.end() && ib->second == 0) ++ib;
      const bool ea = ia == a.weights_.end();
      const bool eb = ib == b.weights_.end();
      if (ea != eb) return false;
      if (ea) break;
      if (ia->first != ib->first || ia->second != ib->second) return false;
      ++ia;
      ++ib;
    }
    return true;
  }

 private:
  Alphabet alphabet_;
  Cell anchor_ = 0;
  std::int64_t length_ = 0;
  std::vector<std::pair<std::uint64_t, Rational>> weights_;
};

/// The event set behind one weight: all random words on [window_lo,
/// window_hi] mapping the fixed context into the target cylinder. Checkable
/// by re-evaluation.
struct EventWitness {
  Cell window_lo = 0;
  Cell window_hi = 0;  // inclusive
  std::vector<std::uint64_t> words;
};

}  // namespace sca
