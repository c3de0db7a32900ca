#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sca/alphabet.hpp"
#include "sca/budget.hpp"
#include "sca/errors.hpp"
#include "sca/word.hpp"

namespace sca {

/// Ordered list of cell offsets. Order is significant: it fixes rule-table
/// indexing.
struct Neighborhood {
  std::vector<int> offsets;

  Neighborhood() = default;
  Neighborhood(std::initializer_list<int> o) : offsets(o) { validate(); }
  explicit Neighborhood(std::vector<int> o) : offsets(std::move(o)) { validate(); }

  void validate() const {
    std::set<int> seen(offsets.begin(), offsets.end());
    if (seen.size() != offsets.size()) throw Error("neighborhood offsets must be distinct");
  }

  std::size_t size() const { return offsets.size(); }
  int max_abs() const {
    int m = 0;
    for (int v : offsets) m = std::max(m, v < 0 ? -v : v);
    return m;
  }
  int min_offset() const {
    int m = 0;
    for (std::size_t i = 0; i < offsets.size(); ++i) m = i ? std::min(m, offsets[i]) : offsets[i];
    return offsets.empty() ? 0 : m;
  }
  int max_offset() const {
    int m = 0;
    for (std::size_t i = 0; i < offsets.size(); ++i) m = i ? std::max(m, offsets[i]) : offsets[i];
    return offsets.empty() ? 0 : m;
  }

  friend bool operator==(const Neighborhood& a, const Neighborhood& b) {
    return a.offsets == b.offsets;
  }
};

/// Programmatic local rule for automata whose table would not fit any budget.
/// `non_determinism_witness`, when set, holds (state word, random word A,
/// random word B) with different outputs, certifying the rule reads its
/// random arguments.
struct FunctionRule {
  std::function<Symbol(std::span<const Symbol>, std::span<const Symbol>)> f;
  std::optional<std::tuple<std::vector<Symbol>, std::vector<Symbol>, std::vector<Symbol>>>
      non_determinism_witness;
};

/// Stochastic cellular automaton (Q, R, V, V', f). The local rule maps a
/// state word over V and a random word over V' to a state. Immutable after
/// construction and safe to share across threads.
class Sca {
 public:
  Sca() = default;

  Sca(Alphabet states, Alphabet random, Neighborhood nbr, Neighborhood rnd_nbr,
      std::vector<Symbol> table, std::string name = {})
      : states_(std::move(states)),
        random_(std::move(random)),
        nbr_(std::move(nbr)),
        rnd_nbr_(std::move(rnd_nbr)),
        table_(std::make_shared<const std::vector<Symbol>>(std::move(table))),
        name_(std::move(name)) {
    const std::uint64_t want = table_size_required();
    if (table_->size() != want)
      throw SchemaError("rule table length " + std::to_string(table_->size()) +
                        ", expected " + std::to_string(want));
    for (Symbol s : *table_)
      if (s >= states_.size()) throw SchemaError("rule table entry out of state range");
  }

  Sca(Alphabet states, Alphabet random, Neighborhood nbr, Neighborhood rnd_nbr,
      FunctionRule rule, std::string name = {})
      : states_(std::move(states)),
        random_(std::move(random)),
        nbr_(std::move(nbr)),
        rnd_nbr_(std::move(rnd_nbr)),
        rule_(std::make_shared<FunctionRule>(std::move(rule))),
        name_(std::move(name)) {}

  const Alphabet& states() const { return states_; }
  const Alphabet& random() const { return random_; }
  const Neighborhood& nbr() const { return nbr_; }
  const Neighborhood& rnd_nbr() const { return rnd_nbr_; }
  const std::string& name() const { return name_; }

  std::size_t r() const { return nbr_.size(); }
  std::size_t r_prime() const { return rnd_nbr_.size(); }

  bool table_backed() const { return rule_ == nullptr; }
  const std::vector<Symbol>& table() const {
    if (!table_backed()) throw Error("automaton has a programmatic rule, no table");
    return *table_;
  }

  std::uint64_t table_size_required() const {
    const std::uint64_t n =
        mul_sat(pow_sat(states_.size(), r()), pow_sat(random_.size(), r_prime()));
    return n;
  }

  // index = (sum_j q_j |Q|^(r-1-j)) * |R|^r' + sum_j s_j |R|^(r'-1-j),
  // big-endian in declared neighborhood order.
  std::uint64_t table_index(std::span<const Symbol> q_word, std::span<const Symbol> s_word) const {
    std::uint64_t qi = 0;
    for (Symbol q : q_word) qi = qi * states_.size() + q;
    std::uint64_t si = 0;
    for (Symbol s : s_word) si = si * random_.size() + s;
    return qi * pow_sat(random_.size(), r_prime()) + si;
  }

  Symbol apply_rule(std::span<const Symbol> q_word, std::span<const Symbol> s_word) const {
    if (rule_) return rule_->f(q_word, s_word);
    return (*table_)[table_index(q_word, s_word)];
  }

  /// True iff the rule output never depends on its random arguments.
  /// Table-backed: exact scan. Function-backed: refuted by the stored
  /// witness pair when present, else scanned within budget.
  bool is_deterministic() const {
    if (rule_ && rule_->non_determinism_witness) {
      const auto& [qw, ra, rb] = *rule_->non_determinism_witness;
      if (rule_->f(qw, ra) != rule_->f(qw, rb)) return false;
      // Witness stale; fall through to the scan.
    }
    const std::uint64_t nq = pow_sat(states_.size(), r());
    const std::uint64_t ns = pow_sat(random_.size(), r_prime());
    check_budget(mul_sat(nq, ns), "determinism scan");
    for (std::uint64_t qi = 0; qi < nq; ++qi) {
      const auto qw = word_of_rank(qi, states_.size(), static_cast<std::int64_t>(r()));
      std::optional<Symbol> first;
      for (std::uint64_t si = 0; si < ns; ++si) {
        const auto sw = word_of_rank(si, random_.size(), static_cast<std::int64_t>(r_prime()));
        const Symbol out = apply_rule(qw, sw);
        if (!first) first = out;
        else if (*first != out) return false;
      }
    }
    return true;
  }

  friend bool operator==(const Sca& a, const Sca& b) {
    // Function-backed automata compare by identity of the rule object.
    if (a.rule_ || b.rule_) return a.rule_ == b.rule_;
    return a.states_ == b.states_ && a.random_ == b.random_ && a.nbr_ == b.nbr_ &&
           a.rnd_nbr_ == b.rnd_nbr_ && *a.table_ == *b.table_;
  }

 private:
  Alphabet states_;
  Alphabet random_;
  Neighborhood nbr_;
  Neighborhood rnd_nbr_;
  std::shared_ptr<const std::vector<Symbol>> table_;  // shared: copies are cheap
  std::shared_ptr<FunctionRule> rule_;
  std::string name_;
};

/// max |v| over V union V'.
inline int radius(const Sca& a) { return std::max(a.nbr().max_abs(), a.rnd_nbr().max_abs()); }

/// Materialize an automaton from a local rule given as a callable
/// (state word, random word) -> state. Checks the table size against the
/// enumeration budget first.
template <class Fn>
Sca make_sca(Alphabet states, Alphabet random, Neighborhood nbr, Neighborhood rnd_nbr, Fn&& f,
             std::string name = {}) {
  const std::uint64_t nq = pow_sat(states.size(), nbr.size());
  const std::uint64_t ns = pow_sat(random.size(), rnd_nbr.size());
  const std::uint64_t total = mul_sat(nq, ns);
  check_budget(total, "rule table materialization");
  std::vector<Symbol> table;
  table.reserve(total);
  for (std::uint64_t qi = 0; qi < nq; ++qi) {
    const auto qw = word_of_rank(qi, states.size(), static_cast<std::int64_t>(nbr.size()));
    for (std::uint64_t si = 0; si < ns; ++si) {
      const auto sw = word_of_rank(si, random.size(), static_cast<std::int64_t>(rnd_nbr.size()));
      table.push_back(f(qw, sw));
    }
  }
  return Sca(std::move(states), std::move(random), std::move(nbr), std::move(rnd_nbr),
             std::move(table), std::move(name));
}

}  // namespace sca
