#include "sca/equivalence.hpp"

#include <algorithm>
#include <map>

#include "sca/budget.hpp"

namespace sca {

namespace {

enum class CompareMode { Weights, Supports };

// First rank where the two distributions differ under `cmp`, or nullopt.
std::optional<std::tuple<std::uint64_t, Rational, Rational>> first_difference(
    const CylinderDist& da, const CylinderDist& db, CompareMode cmp) {
  auto ia = da.entries().begin();
  auto ib = db.entries().begin();
  const auto ea = da.entries().end();
  const auto eb = db.entries().end();
  while (ia != ea || ib != eb) {
    while (ia != ea && ia->second == 0) ++ia;
    while (ib != eb && ib->second == 0) ++ib;
    if (ia == ea && ib == eb) break;
    std::uint64_t ra = ia == ea ? UINT64_MAX : ia->first;
    std::uint64_t rb = ib == eb ? UINT64_MAX : ib->first;
    if (ra < rb) {
      return std::tuple{ra, ia->second, Rational(0)};
    } else if (rb < ra) {
      return std::tuple{rb, Rational(0), ib->second};
    } else {
      if (cmp == CompareMode::Weights && ia->second != ib->second)
        return std::tuple{ra, ia->second, ib->second};
      ++ia;
      ++ib;
    }
  }
  return std::nullopt;
}

EqualityVerdict sweep_equal(const WindowKernel& a, const WindowKernel& b, std::int64_t max_window,
                            CompareMode cmp, ExecMode mode) {
  if (!(a.state_alphabet() == b.state_alphabet()))
    throw AlphabetMismatch("equality sweep: state alphabets differ");
  const Alphabet& alph = a.state_alphabet();

  EqualityVerdict verdict;
  verdict.max_window = max_window;
  for (std::int64_t L = 1; L <= max_window; ++L) {
    const Window w{0, L};
    const auto sa = a.context_span(w);
    const auto sb = b.context_span(w);
    const Cell lo = std::min(sa.first, sb.first);
    const Cell hi = std::max(sa.second, sb.second);
    const std::int64_t span = hi - lo + 1;
    const std::uint64_t n_ctx = pow_sat(alph.size(), static_cast<std::uint64_t>(span));
    check_budget(n_ctx, "equality sweep contexts");

    const auto differs = [&](std::uint64_t ci) {
      const Word ctx(alph, word_of_rank(ci, alph.size(), span), lo);
      const CylinderDist da = a.one_step(ctx, w, ExecMode::Serial);
      const CylinderDist db = b.one_step(ctx, w, ExecMode::Serial);
      return first_difference(da, db, cmp).has_value();
    };
    const std::uint64_t hit = first_index_where(n_ctx, differs, mode);
    verdict.contexts_checked += n_ctx;
    if (hit < n_ctx) {
      const Word ctx(alph, word_of_rank(hit, alph.size(), span), lo);
      const auto diff =
          first_difference(a.one_step(ctx, w, mode), b.one_step(ctx, w, mode), cmp);
      verdict.status = EqualityVerdict::Status::Unequal;
      EqualityWitness wit{ctx, w, std::get<0>(*diff), std::get<1>(*diff), std::get<2>(*diff)};
      verdict.witness = std::move(wit);
      return verdict;
    }
  }
  return verdict;
}

// Deterministic global image of the context on the window, as a point mass.
CylinderDist det_image(const Sca& a, const Word& ctx, const Window& w) {
  const int rho = radius(a);
  std::vector<Symbol> zeros(static_cast<std::size_t>(w.L + 2 * rho), 0);
  std::vector<Symbol> out;
  out.reserve(static_cast<std::size_t>(w.L));
  std::vector<Symbol> qb(a.r()), sb(a.r_prime());
  for (std::int64_t j = 0; j < w.L; ++j) {
    for (std::size_t i = 0; i < a.r(); ++i) qb[i] = ctx.at(w.z + j + a.nbr().offsets[i]);
    for (std::size_t i = 0; i < a.r_prime(); ++i) sb[i] = 0;
    out.push_back(a.apply_rule(qb, sb));
  }
  return CylinderDist::point_mass(Word(a.states(), std::move(out), w.z));
}

/// Kernel exposing the deterministic global map F(c, 0^Z) as point masses.
class DeterministicKernel : public WindowKernel {
 public:
  explicit DeterministicKernel(Sca a) : a_(std::move(a)) {}
  const Alphabet& state_alphabet() const override { return a_.states(); }
  std::pair<Cell, Cell> context_span(const Window& w) const override {
    const int rho = radius(a_);
    return {w.z - rho, w.z + w.L - 1 + rho};
  }
  CylinderDist one_step(const Word& context, const Window& w, ExecMode) const override {
    return det_image(a_, context, w);
  }

 private:
  Sca a_;
};

// Evaluates F(context, random word) on [w.z, w.z+L); the random word is
// anchored at rnd_lo.
std::vector<Symbol> explicit_image(const Sca& a, const Word& ctx, const Window& w,
                                   const std::vector<Symbol>& rnd, Cell rnd_lo) {
  std::vector<Symbol> qb(a.r()), sb(a.r_prime());
  std::vector<Symbol> out;
  out.reserve(static_cast<std::size_t>(w.L));
  for (std::int64_t j = 0; j < w.L; ++j) {
    for (std::size_t i = 0; i < a.r(); ++i) qb[i] = ctx.at(w.z + j + a.nbr().offsets[i]);
    for (std::size_t i = 0; i < a.r_prime(); ++i) {
      const Cell pos = w.z + j + a.rnd_nbr().offsets[i];
      sb[i] = rnd[static_cast<std::size_t>(pos - rnd_lo)];
    }
    out.push_back(a.apply_rule(qb, sb));
  }
  return out;
}

}  // namespace

EqualityVerdict one_step_equal(const WindowKernel& a, const WindowKernel& b,
                               std::int64_t max_window, ExecMode mode) {
  return sweep_equal(a, b, max_window, CompareMode::Weights, mode);
}

EqualityVerdict nondet_equal(const WindowKernel& a, const WindowKernel& b,
                             std::int64_t max_window, ExecMode mode) {
  return sweep_equal(a, b, max_window, CompareMode::Supports, mode);
}

EqualityVerdict one_step_equal(const Sca& a, const Sca& b, std::int64_t max_window,
                               ExecMode mode) {
  return sweep_equal(ScaKernel(a), ScaKernel(b), max_window, CompareMode::Weights, mode);
}

EqualityVerdict nondet_equal(const Sca& a, const Sca& b, std::int64_t max_window, ExecMode mode) {
  return sweep_equal(ScaKernel(a), ScaKernel(b), max_window, CompareMode::Supports, mode);
}

EqualityVerdict deterministic_equal(const Sca& a, const Sca& b, std::int64_t max_window,
                                    ExecMode mode) {
  return sweep_equal(DeterministicKernel(a), DeterministicKernel(b), max_window,
                     CompareMode::Weights, mode);
}

Rational Coupling::weight(std::uint64_t v1, std::uint64_t v2) const {
  for (const auto& [pair, w] : entries)
    if (pair.first == v1 && pair.second == v2) return w;
  return Rational(0);
}

std::variant<Coupling, EqualityVerdict> build_coupling(const Sca& a, const Sca& b,
                                                       const Word& context, std::int64_t n,
                                                       ExecMode mode) {
  if (!(a.states() == b.states())) throw AlphabetMismatch("build_coupling: states differ");
  const int rho = std::max(radius(a), radius(b));
  const std::int64_t width = 2 * (n + rho) + 1;
  const Cell lo = -(n + rho);
  if (!context.covers(lo, n + rho))
    throw InsufficientContext("build_coupling: context must cover [-(n+rho), n+rho]");
  const Window w{-n, 2 * n + 1};

  // Common-width cones: weights |P_u| / |R_i|^width match the one-step
  // distribution because the extra rho - rho_i cells are free.
  const std::uint64_t na = pow_sat(a.random().size(), static_cast<std::uint64_t>(width));
  const std::uint64_t nb = pow_sat(b.random().size(), static_cast<std::uint64_t>(width));
  check_budget(na, "build_coupling left cone");
  check_budget(nb, "build_coupling right cone");

  const CylinderDist da = one_step_dist(a, context, w, mode);
  const CylinderDist db = one_step_dist(b, context, w, mode);
  if (!(da == db)) {
    EqualityVerdict verdict;
    verdict.status = EqualityVerdict::Status::Unequal;
    verdict.max_window = 2 * n + 1;
    verdict.contexts_checked = 1;
    const auto diff = first_difference(da, db, CompareMode::Weights);
    verdict.witness =
        EqualityWitness{context, w, std::get<0>(*diff), std::get<1>(*diff), std::get<2>(*diff)};
    return verdict;
  }

  // P_u^i in lexicographic order: enumeration order is ascending rank.
  const auto partition = [&](const Sca& x, std::uint64_t total) {
    std::map<std::uint64_t, std::vector<std::uint64_t>> p;
    const std::uint64_t rsize = x.random().size();
    std::vector<Symbol> rnd(static_cast<std::size_t>(width));
    for (std::uint64_t idx = 0; idx < total; ++idx) {
      std::uint64_t v = idx;
      for (std::int64_t i = width - 1; i >= 0; --i) {
        rnd[static_cast<std::size_t>(i)] = static_cast<Symbol>(v % rsize);
        v /= rsize;
      }
      const auto img = explicit_image(x, context, w, rnd, lo);
      p[rank_of_word(img, x.states().size())].push_back(idx);
    }
    return p;
  };
  const auto pa = partition(a, na);
  const auto pb = partition(b, nb);

  Coupling g;
  g.left_alphabet = a.random();
  g.right_alphabet = b.random();
  g.width = width;
  for (const auto& [urank, va] : pa) {
    const auto itb = pb.find(urank);
    if (itb == pb.end()) continue;  // unreachable given da == db
    const auto& vb = itb->second;
    const Rational mu = da.weight(urank);
    // Overlap of the two rank-interval partitions of [0,1).
    const std::uint64_t ca = va.size(), cb = vb.size();
    std::uint64_t i = 0, j = 0;
    Rational pos = 0;
    while (i < ca && j < cb) {
      const Rational enda = make_fraction(BigInt(i + 1), BigInt(ca));
      const Rational endb = make_fraction(BigInt(j + 1), BigInt(cb));
      const Rational next = std::min(enda, endb);
      const Rational overlap = next - pos;
      if (overlap > 0) g.entries.push_back({{va[i], vb[j]}, overlap * mu});
      pos = next;
      if (enda == next) ++i;
      if (endb == next) ++j;
    }
  }
  std::sort(g.entries.begin(), g.entries.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  return g;
}

bool verify_coupling(const Sca& a, const Sca& b, const Word& context, const Coupling& g) {
  if (!(a.states() == b.states())) throw AlphabetMismatch("verify_coupling: states differ");
  if (!(g.left_alphabet == a.random()) || !(g.right_alphabet == b.random()))
    throw DimensionMismatch("verify_coupling: coupling alphabets do not match the automata");
  const int rho = std::max(radius(a), radius(b));
  const std::int64_t width = g.width;
  if (width < 1 || width % 2 == 0 || (width - 1) / 2 < rho)
    throw DimensionMismatch("verify_coupling: width must be 2(n+rho)+1 for some n >= 0");
  const std::int64_t n = (width - 1) / 2 - rho;
  const Cell lo = -(n + rho);
  if (!context.covers(lo, n + rho))
    throw InsufficientContext("verify_coupling: context must cover [-(n+rho), n+rho]");
  const Window w{-n, 2 * n + 1};

  const std::uint64_t na = pow_sat(a.random().size(), static_cast<std::uint64_t>(width));
  const std::uint64_t nb = pow_sat(b.random().size(), static_cast<std::uint64_t>(width));
  check_budget(na, "verify_coupling left marginal");
  check_budget(nb, "verify_coupling right marginal");

  // Condition 1: both marginals uniform.
  std::map<std::uint64_t, Rational> ma, mb;
  Rational total = 0;
  for (const auto& [pair, wt] : g.entries) {
    if (wt < 0) return false;
    ma[pair.first] += wt;
    mb[pair.second] += wt;
    total += wt;
  }
  if (total != 1) return false;
  const Rational ua = make_fraction(1, ipow(BigInt(a.random().size()),
                                            static_cast<std::uint64_t>(width)));
  const Rational ub = make_fraction(1, ipow(BigInt(b.random().size()),
                                            static_cast<std::uint64_t>(width)));
  if (ma.size() != na || mb.size() != nb) return false;
  for (const auto& [v, wt] : ma)
    if (wt != ua) return false;
  for (const auto& [v, wt] : mb)
    if (wt != ub) return false;

  // Condition 2: almost-sure agreement of the images on the window.
  const auto decode = [width](std::uint64_t idx, std::uint64_t rsize) {
    return word_of_rank(idx, rsize, width);
  };
  Rational agree = 0;
  for (const auto& [pair, wt] : g.entries) {
    if (wt == 0) continue;
    const auto ra = decode(pair.first, a.random().size());
    const auto rb = decode(pair.second, b.random().size());
    if (explicit_image(a, context, w, ra, lo) == explicit_image(b, context, w, rb, lo))
      agree += wt;
  }
  return agree == 1;
}

Sca lift_to_noise(const Sca& a) {
  if (!a.is_deterministic()) throw NotDeterministic("lift_to_noise needs a deterministic CA");
  const std::vector<Symbol> zeros(a.r_prime(), 0);
  return make_sca(a.states(), a.states(), Neighborhood{0}, a.nbr(),
                  [&a, &zeros](const std::vector<Symbol>&, const std::vector<Symbol>& s) {
                    return a.apply_rule(s, zeros);
                  },
                  a.name().empty() ? "noise-lift" : "noise-lift(" + a.name() + ")");
}

UniformityVerdict uniformity_check(const Sca& a, std::int64_t max_window, ExecMode mode) {
  const int rho = radius(a);
  UniformityVerdict verdict;
  for (std::int64_t L = 1; L <= max_window; ++L) {
    const Window w{0, L};
    const Cell lo = -rho;
    const std::int64_t span = L + 2 * rho;
    const std::uint64_t n_ctx = pow_sat(a.states().size(), static_cast<std::uint64_t>(span));
    check_budget(n_ctx, "uniformity sweep contexts");

    const auto nonuniform = [&](std::uint64_t ci) {
      const Word ctx(a.states(), word_of_rank(ci, a.states().size(), span), lo);
      return !one_step_dist(a, ctx, w, ExecMode::Serial).is_uniform();
    };
    const std::uint64_t hit = first_index_where(n_ctx, nonuniform, mode);
    verdict.contexts_checked += n_ctx;
    if (hit < n_ctx) {
      const Word ctx(a.states(), word_of_rank(hit, a.states().size(), span), lo);
      const CylinderDist d = one_step_dist(a, ctx, w, mode);
      const Rational uniform =
          make_fraction(1, ipow(BigInt(a.states().size()), static_cast<std::uint64_t>(L)));
      // First word whose weight misses the uniform value.
      const std::uint64_t n_words = pow_sat(a.states().size(), static_cast<std::uint64_t>(L));
      for (std::uint64_t rank = 0; rank < n_words; ++rank) {
        if (d.weight(rank) != uniform) {
          verdict.uniform = false;
          verdict.witness = EqualityWitness{ctx, w, rank, d.weight(rank), uniform};
          return verdict;
        }
      }
    }
  }
  return verdict;
}

}  // namespace sca
