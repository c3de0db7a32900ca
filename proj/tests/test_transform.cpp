#include "doctest.h"

#include "sca/constructions.hpp"
#include "sca/core.hpp"
#include "sca/equivalence.hpp"
#include "sca/transform.hpp"
#include "zoo.hpp"

using namespace sca;
using namespace sca::testing;

namespace {

// Three states over R = {0,1}; {0,1} is a stable pair ((q+s) mod 2), state 2
// escapes into it.
Sca three_state_with_stable_pair() {
  return make_sca(Alphabet(3), binary(), Neighborhood{0}, Neighborhood{0},
                  [](const std::vector<Symbol>& c, const std::vector<Symbol>& s) -> Symbol {
                    if (c[0] < 2) return (c[0] + s[0]) & 1u;
                    return s[0];
                  });
}

// Four states projecting onto the identity CA via q mod 2.
Sca four_state_lift_of_identity() {
  return make_sca(Alphabet(4), binary(), Neighborhood{0}, Neighborhood{0},
                  [](const std::vector<Symbol>& c, const std::vector<Symbol>&) -> Symbol {
                    return c[0] & 1u;
                  });
}

TrimMap make_restriction(const Sca& a, std::vector<std::uint64_t> images) {
  return TrimMap::restriction(std::vector<BigInt>(images.begin(), images.end()),
                              BigInt(a.states().size()));
}

TrimMap make_projection(const Sca& a, std::vector<std::uint64_t> targets,
                        std::uint64_t codomain) {
  return TrimMap::projection(std::vector<BigInt>(targets.begin(), targets.end()),
                             BigInt(codomain));
}

}  // namespace

TEST_CASE("check_restriction") {
  const Sca p = parity_sca();
  CHECK(check_restriction(p, TrimMap::identity_restriction(3)));
  CHECK(check_restriction(p, make_restriction(p, {kParityHash})));
  CHECK_FALSE(check_restriction(p, make_restriction(p, {kParityZero})));
}

TEST_CASE("restrict_sca") {
  SUBCASE("identity injection keeps the table up to renaming") {
    const Sca noise = noise_ca();
    const Sca r = restrict_sca(noise, TrimMap::identity_restriction(2));
    CHECK(r.table() == noise.table());
  }
  SUBCASE("parity restricted to the wall symbol is the constant automaton") {
    const Sca p = parity_sca();
    const Sca r = restrict_sca(p, make_restriction(p, {kParityHash}));
    CHECK(r.states().size() == 1);
    for (Symbol s : r.table()) CHECK(s == 0);
  }
  SUBCASE("stable pair of the three-state automaton") {
    const Sca a = three_state_with_stable_pair();
    const TrimMap i = make_restriction(a, {0, 1});
    REQUIRE(check_restriction(a, i));
    const Sca r = restrict_sca(a, i);
    // Hand computation: f'(q, s) = (q + s) mod 2.
    CHECK(r.table() == std::vector<Symbol>{0, 1, 1, 0});
  }
  SUBCASE("unstable restriction carries a witness") {
    const Sca p = parity_sca();
    try {
      restrict_sca(p, make_restriction(p, {kParityZero}));
      FAIL("expected UnstableRestriction");
    } catch (const UnstableRestriction& e) {
      // Re-evaluating the witness must leave the sub-alphabet.
      const Symbol out = p.apply_rule(e.state_word, e.random_word);
      CHECK(out != kParityZero);
    }
  }
}

TEST_CASE("check_projection and project_sca") {
  SUBCASE("identity projection") {
    const Sca noise = noise_ca();
    CHECK(check_projection(noise, TrimMap::identity_projection(2)));
    const Sca q = project_sca(noise, TrimMap::identity_projection(2));
    CHECK(q.table() == noise.table());
  }
  SUBCASE("lifted automaton projects back to the identity CA") {
    const Sca b = four_state_lift_of_identity();
    const TrimMap pi = make_projection(b, {0, 1, 0, 1}, 2);
    REQUIRE(check_projection(b, pi));
    const Sca back = project_sca(b, pi);
    CHECK(one_step_equal(back, identity_ca(), 2).equal());
  }
  SUBCASE("noise CA ignores states, any merge is compatible") {
    const Sca noise = noise_ca();
    const TrimMap pi = make_projection(noise, {0, 0}, 1);
    REQUIRE(check_projection(noise, pi));
    const Sca one = project_sca(noise, pi);
    CHECK(one.states().size() == 1);
  }
  SUBCASE("incompatible projection carries a witness") {
    // Successor mod 3: merging {0,1} sends their images 1 and 2 to distinct
    // classes, so the rule does not factor.
    const Sca succ = make_sca(Alphabet(3), binary(), Neighborhood{0}, Neighborhood{0},
                              [](const std::vector<Symbol>& c, const std::vector<Symbol>&) {
                                return (c[0] + 1) % 3;
                              });
    const TrimMap bad = make_projection(succ, {0, 0, 1}, 2);
    CHECK_FALSE(check_projection(succ, bad));
    try {
      project_sca(succ, bad);
      FAIL("expected IncompatibleProjection");
    } catch (const IncompatibleProjection& e) {
      // The two witness words project equally but their images do not.
      const Symbol outa = succ.apply_rule(e.state_word_a, e.random_word);
      const Symbol outb = succ.apply_rule(e.state_word_b, e.random_word);
      const std::vector<Symbol> pi{0, 0, 1};
      CHECK(pi[outa] != pi[outb]);
    }
  }
}

TEST_CASE("trimmed distributions transport exactly") {
  SUBCASE("restriction") {
    const Sca a = three_state_with_stable_pair();
    const TrimMap i = make_restriction(a, {0, 1});
    const Sca r = restrict_sca(a, i);
    // Contexts up to length 2 rho + 3.
    const Word ctx(r.states(), {0, 1, 0}, -1);
    const Word lifted(a.states(), {0, 1, 0}, -1);
    const CylinderDist dr = one_step_dist(r, ctx, Window{0, 2});
    const CylinderDist da = one_step_dist(a, lifted, Window{0, 2});
    for (std::uint64_t rank = 0; rank < 4; ++rank) {
      const auto w = word_of_rank(rank, 2, 2);
      // i maps 0 -> 0, 1 -> 1 here, so ranks transport over alphabet change.
      const std::uint64_t lifted_rank = rank_of_word(w, 3);
      CHECK(dr.weight(rank) == da.weight(lifted_rank));
    }
  }
  SUBCASE("projection sums fibers and is lift independent") {
    const Sca b = four_state_lift_of_identity();
    const TrimMap pi = make_projection(b, {0, 1, 0, 1}, 2);
    const Sca q = project_sca(b, pi);
    const Word ctx(q.states(), {1, 0, 1}, -1);
    const CylinderDist dq = one_step_dist(q, ctx, Window{0, 2});
    for (const std::vector<Symbol>& lift :
         {std::vector<Symbol>{1, 0, 1}, std::vector<Symbol>{3, 2, 1}}) {
      const Word lctx(b.states(), lift, -1);
      const CylinderDist db = one_step_dist(b, lctx, Window{0, 2});
      for (std::uint64_t rank = 0; rank < 4; ++rank) {
        Rational fiber = 0;
        for (std::uint64_t urank = 0; urank < 16; ++urank) {
          const auto u = word_of_rank(urank, 4, 2);
          std::uint64_t proj = 0;
          for (Symbol s : u) proj = proj * 2 + (s & 1u);
          if (proj == rank) fiber += db.weight(urank);
        }
        CHECK(dq.weight(rank) == fiber);
      }
    }
  }
}

TEST_CASE("compose_trims") {
  SUBCASE("identity restriction only") {
    const Sca noise = noise_ca();
    const auto [i, pi] = compose_trims({TrimMap::identity_restriction(2)}, noise);
    CHECK(i.mapping == std::vector<BigInt>{0, 1});
    CHECK(pi.mapping == std::vector<BigInt>{0, 1});
  }
  SUBCASE("two restrictions compose into one") {
    const Sca ident3 = make_sca(Alphabet(3), binary(), Neighborhood{0}, Neighborhood{0},
                                [](const std::vector<Symbol>& c, const std::vector<Symbol>&) {
                                  return c[0];
                                });
    const TrimMap first = make_restriction(ident3, {0, 2});
    // Second restriction picks index 1 of the 2-state result (original 2).
    const TrimMap second = TrimMap::restriction({BigInt(1)}, BigInt(2));
    const auto [i, pi] = compose_trims({first, second}, ident3);
    CHECK(i.mapping == std::vector<BigInt>{2});
    CHECK(pi.mapping == std::vector<BigInt>{0});
  }
  SUBCASE("projection then restriction becomes restriction then projection") {
    const Sca b = four_state_lift_of_identity();
    const TrimMap pi = make_projection(b, {0, 1, 0, 1}, 2);
    const TrimMap narrow = TrimMap::restriction({BigInt(0)}, BigInt(2));
    const auto [i, po] = compose_trims({pi, narrow}, b);
    // pi^-1({0}) = {0, 2}.
    CHECK(i.mapping == std::vector<BigInt>{0, 2});
    CHECK(po.mapping == std::vector<BigInt>{0, 0});
    // And the pair applies.
    const Sca combined = apply_trim_pair(b, i, po);
    CHECK(combined.states().size() == 1);
  }
}

TEST_CASE("rescale identity and shift") {
  SUBCASE("identity packed in pairs stays the identity") {
    const Sca r = rescale(identity_ca(), RescaleParams{2, 1, 0});
    CHECK(r.states().size() == 4);
    CHECK(r.states().name_of(2) == "1|0");
    const Sca fresh = make_sca(Alphabet(4), Alphabet(4), Neighborhood{0}, Neighborhood{0},
                               [](const std::vector<Symbol>& c, const std::vector<Symbol>&) {
                                 return c[0];
                               });
    CHECK(one_step_equal(r, fresh, 2).equal());
  }
  SUBCASE("shift composed with the inverse translation is the identity") {
    const Sca r = rescale(shift_ca(), RescaleParams{1, 1, -1});
    CHECK(one_step_equal(r, identity_ca(), 2).equal());
  }
  SUBCASE("noise grouped twice in time is noise over R^2") {
    const Sca r = rescale(noise_ca(), RescaleParams{1, 2, 0});
    CHECK(r.random().size() == 4);
    const Sca fresh = make_sca(binary(), Alphabet(4), Neighborhood{0}, Neighborhood{0},
                               [](const std::vector<Symbol>&, const std::vector<Symbol>& s) {
                                 return s[0] & 1u;
                               });
    CHECK(one_step_equal(r, fresh, 2).equal());
    const Word ctx = const_word(r.states(), 0, -1, 3);
    CHECK(one_step_dist(r, ctx, Window{0, 1}).is_uniform());
  }
}

TEST_CASE("minimal rescaled neighborhoods use exact sumsets") {
  // V = {-1, 1}: two steps reach {-2, 0, 2}; the packed neighborhood at
  // m = 1 must skip the odd offsets.
  const Sca hop = make_sca(binary(), binary(), Neighborhood{-1, 1}, Neighborhood{0},
                           [](const std::vector<Symbol>& c, const std::vector<Symbol>&) -> Symbol {
                             return (c[0] ^ c[1]) & 1u;
                           });
  const Sca r = rescale(hop, RescaleParams{1, 2, 0});
  CHECK(r.nbr().offsets == std::vector<int>{-2, 0, 2});
}

TEST_CASE("rescaled kernel matches the materialized rescale") {
  for (std::uint64_t seed = 400; seed < 406; ++seed) {
    const Sca a = random_sca(seed);
    for (const RescaleParams p : {RescaleParams{2, 1, 0}, RescaleParams{1, 2, 1},
                                  RescaleParams{2, 2, -1}}) {
      Sca mat;
      try {
        mat = rescale(a, p);
      } catch (const BudgetExceeded&) {
        continue;
      }
      // Keep unit runtime sane: skip draws whose packed cone is heavyweight.
      if (pow_sat(mat.random().size(),
                  static_cast<std::uint64_t>(1 + 2 * radius(mat))) > (1u << 18))
        continue;
      const RescaledKernel kernel(std::make_shared<ScaKernel>(a), p);
      const ScaKernel direct(mat);
      const Window w{0, 1};
      const auto span_k = kernel.context_span(w);
      const auto span_d = direct.context_span(w);
      const Cell lo = std::min(span_k.first, span_d.first);
      const Cell hi = std::max(span_k.second, span_d.second);
      SplitMix g(seed);
      for (int trial = 0; trial < 3; ++trial) {
        std::vector<Symbol> cs(static_cast<std::size_t>(hi - lo + 1));
        for (auto& s : cs) s = static_cast<Symbol>(g.below(kernel.state_alphabet().size()));
        const Word ctx(kernel.state_alphabet(), cs, lo);
        bool in_budget = true;
        CylinderDist via_kernel, via_table;
        try {
          via_kernel = kernel.one_step(ctx, w);
          via_table = direct.one_step(ctx, w);
        } catch (const BudgetExceeded&) {
          in_budget = false;  // the largest draws exceed the cap; skip those
        }
        if (in_budget) CHECK(via_kernel == via_table);
      }
    }
  }
}

TEST_CASE("rescale semantics: packed iterates equal base iterates") {
  // iter_dist of rescale(a, p) after t' steps equals the packed base
  // distribution of a after t t' steps, windows L <= 2, t' <= 2.
  for (std::uint64_t seed = 420; seed < 424; ++seed) {
    Sca a = random_sca(seed);
    if (a.states().size() > 2 || a.random().size() > 2) continue;
    const RescaleParams p{2, 2, 0};
    Sca mat;
    try {
      mat = rescale(a, p);
    } catch (const BudgetExceeded&) {
      continue;
    }
    for (std::uint64_t tp = 1; tp <= 2; ++tp) {
      for (std::int64_t L = 1; L <= 2; ++L) {
        const Window w{0, L};
        const ScaKernel mk(mat);
        // Span via the materialized kernel covers the base cone.
        Window cur = w;
        for (std::uint64_t j = 0; j < tp; ++j) {
          const auto s = mk.context_span(cur);
          cur = Window{s.first, s.second - s.first + 1};
        }
        SplitMix g(seed + tp);
        std::vector<Symbol> cs(static_cast<std::size_t>(cur.L));
        for (auto& s : cs) s = static_cast<Symbol>(g.below(mat.states().size()));
        const Word ctx(mat.states(), cs, cur.z);

        const CylinderDist packed = iter_dist(mat, ctx, w, tp);

        // Base side: unpack the context, run t t' base steps on the
        // m-expanded window.
        std::vector<Symbol> base_syms;
        for (Symbol s : cs) {
          const auto cells = word_of_rank(s, a.states().size(), 2);
          base_syms.insert(base_syms.end(), cells.begin(), cells.end());
        }
        const Word base_ctx(a.states(), base_syms, cur.z * 2);
        const CylinderDist based =
            iter_dist(a, base_ctx, Window{2 * w.z, 2 * w.L}, 2 * tp);
        REQUIRE(packed.entries().size() == based.entries().size());
        for (std::size_t e = 0; e < packed.entries().size(); ++e) {
          CHECK(packed.entries()[e].first == based.entries()[e].first);
          CHECK(packed.entries()[e].second == based.entries()[e].second);
        }
      }
    }
  }
}

TEST_CASE("prime factor support is invariant under transforms") {
  const Sca p = parity_sca();
  const Sca r = rescale(p, RescaleParams{2, 1, 0});
  // |R| = 2 becomes |R|^(m t) = 4: same prime support {2}.
  CHECK(r.random().size() == 4);
  const Sca q = restrict_sca(p, make_restriction(p, {kParityHash}));
  CHECK(q.random().size() == p.random().size());
}

namespace {

// Compares the two composition orders of rescalings p then q, correcting the
// residual translation delta = (m k' + t' k) - (m' k + t k') by reading the
// second context delta base cells to the right.
void check_commutation(const Sca& a, const RescaleParams& p, const RescaleParams& q,
                       std::uint64_t seed) {
  const auto inner = std::make_shared<ScaKernel>(a);
  const auto k1 = std::make_shared<RescaledKernel>(
      std::make_shared<RescaledKernel>(inner, p), q);
  const auto k2 = std::make_shared<RescaledKernel>(
      std::make_shared<RescaledKernel>(inner, q), p);
  const std::int64_t m = static_cast<std::int64_t>(p.m), t = static_cast<std::int64_t>(p.t);
  const std::int64_t mp = static_cast<std::int64_t>(q.m), tp = static_cast<std::int64_t>(q.t);
  const std::int64_t delta = (m * q.k + tp * p.k) - (mp * p.k + t * q.k);
  const std::int64_t M = m * mp;

  const Window w{0, 1};
  const auto s1 = k1->context_span(w);
  const auto s2 = k2->context_span(w);
  // One shared base word covering both packed spans plus the delta slack.
  const Cell base_lo = std::min(s1.first * M, s2.first * M + delta) - M;
  const Cell base_hi = std::max((s1.second + 1) * M, (s2.second + 1) * M + delta) + M;
  SplitMix g(seed);
  std::vector<Symbol> base(static_cast<std::size_t>(base_hi - base_lo));
  for (auto& s : base) s = static_cast<Symbol>(g.below(a.states().size()));

  const auto pack = [&](Cell packed_lo, Cell packed_hi, std::int64_t shift) {
    std::vector<Symbol> syms;
    for (Cell b = packed_lo; b <= packed_hi; ++b) {
      std::uint64_t rank = 0;
      for (std::int64_t i = 0; i < M; ++i)
        rank = rank * a.states().size() +
               base[static_cast<std::size_t>(b * M + i + shift - base_lo)];
      syms.push_back(static_cast<Symbol>(rank));
    }
    return Word(k1->state_alphabet(), syms, packed_lo);
  };

  const Word ctx1 = pack(s1.first, s1.second, 0);
  const Word ctx2 = pack(s2.first, s2.second, delta);
  CHECK(k1->one_step(ctx1, w) == k2->one_step(ctx2, w));
}

}  // namespace

TEST_CASE("rescaling composition commutes up to the residual translation") {
  const std::vector<RescaleParams> grid = {
      {1, 1, 0}, {2, 1, 0}, {1, 2, 0}, {2, 2, 0}, {1, 1, 1}, {2, 1, -1}, {1, 2, 1}};
  const Sca a = noise_ca();
  const Sca b = xor_det_ca();
  std::uint64_t seed = 7000;
  for (const auto& p : grid)
    for (const auto& q : grid) {
      check_commutation(a, p, q, seed++);
      check_commutation(b, p, q, seed++);
    }
}

TEST_CASE("composition law matches materialized double rescale") {
  const Sca a = xor_det_ca();
  const RescaleParams p{2, 1, 1}, q{1, 2, 0};
  const Sca two_step = rescale(rescale(a, p), q);
  const Sca direct = rescale(a, compose_rescale(p, q));
  CHECK(two_step.states().size() == direct.states().size());
  // Sampled-context comparison; the exhaustive sweep at these cone sizes is
  // an acceptance-scale job, and the kernel tests above cover the
  // materialization already.
  const ScaKernel k1(two_step), k2(direct);
  const Window w{0, 1};
  const auto s1 = k1.context_span(w);
  const auto s2 = k2.context_span(w);
  const Cell lo = std::min(s1.first, s2.first);
  const Cell hi = std::max(s1.second, s2.second);
  SplitMix g(31337);
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<Symbol> cs(static_cast<std::size_t>(hi - lo + 1));
    for (auto& s : cs) s = static_cast<Symbol>(g.below(two_step.states().size()));
    const Word ctx(two_step.states(), cs, lo);
    CHECK(k1.one_step(ctx, w) == k2.one_step(ctx, w));
  }
}
