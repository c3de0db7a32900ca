#pragma once

#include <stdexcept>
#include <string>

namespace sca {

/// Base class for all workbench errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AlphabetMismatch : Error {
  using Error::Error;
};

/// A distribution/window operation was given a context word that does not
/// cover the dependence span it needs.
struct InsufficientContext : Error {
  using Error::Error;
};

/// An enumeration (random-word cone, table materialization, machine run)
/// would exceed the configured budget. Distinct from other failures so that
/// callers can map it to its own exit code.
struct BudgetExceeded : Error {
  using Error::Error;
};

/// Restriction rejected: carries one violating (state word, random word) pair.
struct UnstableRestriction : Error {
  UnstableRestriction(std::string msg, std::vector<std::uint32_t> q_word,
                      std::vector<std::uint32_t> r_word)
      : Error(std::move(msg)), state_word(std::move(q_word)), random_word(std::move(r_word)) {}
  std::vector<std::uint32_t> state_word;
  std::vector<std::uint32_t> random_word;
};

/// Projection rejected: carries a violating pair of state words (equal under
/// the map) plus the random word separating them.
struct IncompatibleProjection : Error {
  IncompatibleProjection(std::string msg, std::vector<std::uint32_t> q_word_a,
                         std::vector<std::uint32_t> q_word_b, std::vector<std::uint32_t> r_word)
      : Error(std::move(msg)),
        state_word_a(std::move(q_word_a)),
        state_word_b(std::move(q_word_b)),
        random_word(std::move(r_word)) {}
  std::vector<std::uint32_t> state_word_a;
  std::vector<std::uint32_t> state_word_b;
  std::vector<std::uint32_t> random_word;
};

struct InapplicableTrim : Error {
  using Error::Error;
};

struct NotDeterministic : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

/// Input file violates the automaton schema; message carries position info.
struct SchemaError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace sca
