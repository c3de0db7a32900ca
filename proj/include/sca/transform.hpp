#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "sca/kernel.hpp"
#include "sca/rational.hpp"
#include "sca/sca.hpp"

namespace sca {

enum class TrimKind { Restriction, Projection };

/// Symbol-level trimming map. For a restriction, `mapping[q'] = i(q')` is an
/// injection Q' -> Q (entries are images). For a projection, `mapping[q] =
/// pi(q)` is a surjection Q -> Q''. Entries are big integers so injections
/// into never-materialized packed alphabets (universal blocks) fit the same
/// type.
struct TrimMap {
  TrimKind kind = TrimKind::Restriction;
  std::vector<BigInt> mapping;
  BigInt codomain_size = 0;

  static TrimMap restriction(std::vector<BigInt> images, BigInt codomain) {
    return TrimMap{TrimKind::Restriction, std::move(images), std::move(codomain)};
  }
  static TrimMap projection(std::vector<BigInt> targets, BigInt codomain) {
    return TrimMap{TrimKind::Projection, std::move(targets), std::move(codomain)};
  }
  static TrimMap identity_restriction(std::uint64_t n) {
    std::vector<BigInt> m(n);
    for (std::uint64_t i = 0; i < n; ++i) m[i] = i;
    return restriction(std::move(m), BigInt(n));
  }
  static TrimMap identity_projection(std::uint64_t n) {
    std::vector<BigInt> m(n);
    for (std::uint64_t i = 0; i < n; ++i) m[i] = i;
    return projection(std::move(m), BigInt(n));
  }

  std::uint64_t domain_size() const { return mapping.size(); }

  /// mapping entries as machine integers; throws when any entry does not fit
  /// (only universal-block injections are that large).
  std::vector<std::uint64_t> small_mapping() const;

  void validate(const char* what) const;  // injectivity / surjectivity
};

/// Rescaling parameters: pack m cells, group t time steps, shift by k.
struct RescaleParams {
  std::uint64_t m = 1;
  std::uint64_t t = 1;
  std::int64_t k = 0;

  friend bool operator==(const RescaleParams& a, const RescaleParams& b) {
    return a.m == b.m && a.t == b.t && a.k == b.k;
  }
};

/// True iff the image of `i` is stable under the rule for every random word
/// (local closure; equivalent to global stability by locality).
bool check_restriction(const Sca& a, const TrimMap& i);

/// Restriction of `a` to the stable sub-alphabet. Throws UnstableRestriction
/// (carrying a violating pair) when check_restriction fails.
Sca restrict_sca(const Sca& a, const TrimMap& i);

/// True iff the rule factors through `pi`: outputs agree under pi whenever
/// the state words agree cell-wise under pi, for every random word.
bool check_projection(const Sca& a, const TrimMap& pi);

/// Projection of `a` along `pi` (computed from any section; well-defined by
/// compatibility). Throws IncompatibleProjection with a witness otherwise.
Sca project_sca(const Sca& a, const TrimMap& pi);

/// Collapses an applicable sequence of trims into a single
/// restriction-then-projection pair with the same bounded stochastic global
/// map (verified by one_step_equal up to verify_window).
std::pair<TrimMap, TrimMap> compose_trims(const std::vector<TrimMap>& trims, const Sca& a,
                                          std::int64_t verify_window = 2);

/// Applies a restriction-then-projection pair.
Sca apply_trim_pair(const Sca& a, const TrimMap& i, const TrimMap& pi);

/// Packed state alphabet of size |Q|^m with tuple names "a|b" when the base
/// alphabet carries names.
Alphabet packed_alphabet(const Alphabet& base, std::uint64_t m);

/// Random alphabet (R^m)^t with names "a|b;c|d" (m-tuples joined by '|',
/// time layers by ';').
Alphabet rescaled_random_alphabet(const Alphabet& base, std::uint64_t m, std::uint64_t t);

/// Materialized rescaling of `a` by (m, t, k): states Q^m, random (R^m)^t,
/// explicit global map b_m . sigma_k . F^t . unpack. Neighborhoods are
/// minimal: exactly the packed blocks read by the shifted t-fold dependence
/// cone. Refuses above the enumeration budget.
Sca rescale(const Sca& a, const RescaleParams& p, ExecMode mode = default_exec_mode());

/// Window kernel over the rescaled automaton evaluated through the base
/// automaton, no table materialization. Agrees exactly with
/// one_step_dist(rescale(a, p), ...) and composes, which is how doubly
/// rescaled maps are compared.
class RescaledKernel : public WindowKernel {
 public:
  using WindowKernel::one_step;
  RescaledKernel(std::shared_ptr<const WindowKernel> inner, RescaleParams p);

  const Alphabet& state_alphabet() const override { return packed_; }
  std::pair<Cell, Cell> context_span(const Window& w) const override;
  CylinderDist one_step(const Word& context, const Window& w, ExecMode mode) const override;

 private:
  std::shared_ptr<const WindowKernel> inner_;
  RescaleParams p_;
  Alphabet packed_;
};

/// Composition law of rescaling transformations:
/// applying p then q equals the single rescaling (m_p m_q, t_p t_q,
/// m_p k_q + t_q k_p).
RescaleParams compose_rescale(const RescaleParams& first, const RescaleParams& then);

}  // namespace sca
