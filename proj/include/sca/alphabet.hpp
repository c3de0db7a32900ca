#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sca/errors.hpp"

namespace sca {

using Symbol = std::uint32_t;

/// Finite symbol set. Symbols are the indices 0..size-1; names, when present,
/// are display strings only and never affect semantics.
class Alphabet {
 public:
  Alphabet() : size_(1) {}
  explicit Alphabet(std::uint64_t size) : size_(size) {
    if (size_ < 1) throw Error("alphabet size must be >= 1");
  }
  Alphabet(std::uint64_t size, std::vector<std::string> names)
      : size_(size), names_(std::move(names)) {
    if (size_ < 1) throw Error("alphabet size must be >= 1");
    if (names_ && names_->size() != size_)
      throw Error("alphabet names length must equal alphabet size");
    if (names_) {
      std::set<std::string> seen(names_->begin(), names_->end());
      if (seen.size() != names_->size()) throw Error("alphabet names must be pairwise distinct");
    }
  }

  std::uint64_t size() const { return size_; }
  bool has_names() const { return names_.has_value(); }
  const std::vector<std::string>& names() const { return *names_; }

  std::string name_of(Symbol s) const {
    if (names_) return (*names_)[s];
    return std::to_string(s);
  }

  /// Symbol lookup by name; falls back to decimal indices for nameless
  /// alphabets. Throws SchemaError on unknown names.
  Symbol symbol_of(const std::string& name) const {
    if (names_) {
      for (std::uint64_t i = 0; i < names_->size(); ++i)
        if ((*names_)[i] == name) return static_cast<Symbol>(i);
      throw SchemaError("unknown symbol name \"" + name + "\"");
    }
    try {
      const std::uint64_t v = std::stoull(name);
      if (v >= size_) throw SchemaError("symbol index " + name + " out of range");
      return static_cast<Symbol>(v);
    } catch (const std::invalid_argument&) {
      throw SchemaError("unknown symbol \"" + name + "\" for nameless alphabet");
    }
  }

  /// True when every display name is a single character, so words can be
  /// rendered/parsed as plain strings.
  bool single_char_names() const {
    if (!names_) return size_ <= 10;
    for (const auto& n : *names_)
      if (n.size() != 1) return false;
    return true;
  }

  // Structural equality: size only. Names are presentation.
  friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.size_ == b.size_; }
  friend bool operator!=(const Alphabet& a, const Alphabet& b) { return !(a == b); }

 private:
  std::uint64_t size_;
  std::optional<std::vector<std::string>> names_;
};

}  // namespace sca
