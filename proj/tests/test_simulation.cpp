#include "doctest.h"

#include "sca/constructions.hpp"
#include "sca/core.hpp"
#include "sca/simulation.hpp"
#include "sca/transform.hpp"
#include "zoo.hpp"

using namespace sca;
using namespace sca::testing;

TEST_CASE("prime_factors") {
  CHECK(prime_factors(12).primes == std::vector<std::uint64_t>{2, 3});
  CHECK(prime_factors(1).primes.empty());
  CHECK(prime_factors(30).primes == std::vector<std::uint64_t>{2, 3, 5});
  CHECK(prime_factors(97).primes == std::vector<std::uint64_t>{97});
}

TEST_CASE("is_deterministic") {
  CHECK(is_deterministic(identity_ca()));
  CHECK_FALSE(is_deterministic(noise_ca()));
  CHECK_FALSE(is_deterministic(parity_sca()));
}

TEST_CASE("is_noisy_bounded") {
  CHECK(is_noisy_bounded(noise_ca(), 3));
  CHECK_FALSE(is_noisy_bounded(identity_ca(), 3));
  // G(c,s) = c + s: bijective in s on every context.
  const auto [fa, gb] = blank_noise_pair();
  CHECK(is_noisy_bounded(gb, 3));
  CHECK_FALSE(is_noisy_bounded(parity_sca(), 1));
}

TEST_CASE("pf_gate") {
  const Sca a2 = noise_ca();
  const Sca b3 = noise3_ca();
  CHECK_FALSE(pf_gate(a2, b3));

  // Shared factor 2 passes.
  const Alphabet r6(6);
  const Sca b6 = make_sca(binary(), r6, Neighborhood{0}, Neighborhood{0},
                          [](const std::vector<Symbol>&, const std::vector<Symbol>& s) -> Symbol {
                            return s[0] % 2;
                          });
  CHECK(pf_gate(a2, b6));

  // The gate is silent when either side is deterministic.
  CHECK(pf_gate(identity_ca(), b3));
  CHECK(pf_gate(b3, identity_ca()));
}

TEST_CASE("flavor strings") {
  CHECK(flavor_to_string({GlobalKind::Stochastic, TrimFlavor::Mixed}) == "S-m");
  CHECK(flavor_to_string({GlobalKind::NonDeterministic, TrimFlavor::Projection}) == "N-pi");
  const SimFlavor f = flavor_from_string("D-i");
  CHECK(f.global_kind == GlobalKind::Deterministic);
  CHECK(f.trim_kind == TrimFlavor::Injection);
  CHECK_THROWS_AS(flavor_from_string("X-i"), SchemaError);
}

TEST_CASE("search reflexivity across all nine flavors") {
  const SimBounds tight{1, 1, 0, 2};
  const std::vector<Sca> zoo = {noise_ca(), identity_ca(), parity_sca()};
  for (const Sca& a : zoo) {
    for (GlobalKind g :
         {GlobalKind::Deterministic, GlobalKind::NonDeterministic, GlobalKind::Stochastic}) {
      for (TrimFlavor t : {TrimFlavor::Injection, TrimFlavor::Projection, TrimFlavor::Mixed}) {
        const SimFlavor flavor{g, t};
        const SearchResult res = search_simulation(a, a, flavor, tight);
        REQUIRE_MESSAGE(res.found(), flavor_to_string(flavor));
        CHECK(res.witness->left == RescaleParams{1, 1, 0});
        CHECK(res.witness->right == RescaleParams{1, 1, 0});
        CHECK(verify_witness(a, a, flavor, *res.witness));
      }
    }
  }
}

TEST_CASE("search finds the shift-compensating witness") {
  const Sca p = parity_sca();
  const Sca shifted = rescale(p, RescaleParams{1, 1, 1});
  const SimFlavor flavor{GlobalKind::Stochastic, TrimFlavor::Injection};
  const SearchResult res = search_simulation(p, shifted, flavor, SimBounds{1, 1, 1, 2});
  REQUIRE(res.found());
  // First hit in order: right stays unscaled, the left side absorbs the
  // shift.
  CHECK(res.witness->right == RescaleParams{1, 1, 0});
  CHECK(res.witness->left == RescaleParams{1, 1, 1});
  CHECK(verify_witness(p, shifted, flavor, *res.witness));
}

TEST_CASE("prime gate obstruction for incompatible random sources") {
  const SearchResult res =
      search_simulation(noise_ca(), noise3_ca(), {GlobalKind::Stochastic, TrimFlavor::Mixed},
                        SimBounds{2, 2, 1, 2});
  CHECK_FALSE(res.found());
  CHECK(res.obstruction == Obstruction::PrimeGate);
  CHECK(obstruction_code(res.obstruction) == "PRIME_GATE");
}

TEST_CASE("deterministic ideal obstruction") {
  // Simulator deterministic, simulated stochastic: impossible for N/S.
  const SearchResult res =
      search_simulation(noise_ca(), identity_ca(), {GlobalKind::Stochastic, TrimFlavor::Mixed},
                        SimBounds{2, 2, 1, 2});
  CHECK_FALSE(res.found());
  CHECK(res.obstruction == Obstruction::DeterministicIdeal);
}

TEST_CASE("noisy ideal obstruction") {
  // Simulator is noise (full supports everywhere); the identity CA can
  // never match it.
  const SearchResult res =
      search_simulation(identity_ca(), noise_ca(), {GlobalKind::NonDeterministic, TrimFlavor::Mixed},
                        SimBounds{1, 1, 0, 1});
  CHECK_FALSE(res.found());
  CHECK(res.obstruction == Obstruction::NoisyIdeal);
}

TEST_CASE("restriction witnesses are found and verify") {
  // The three-state automaton with stable pair {0,1} simulates its own
  // restriction via the injection.
  const Sca big = make_sca(Alphabet(3), binary(), Neighborhood{0}, Neighborhood{0},
                           [](const std::vector<Symbol>& c, const std::vector<Symbol>& s) -> Symbol {
                             if (c[0] < 2) return (c[0] + s[0]) & 1u;
                             return s[0];
                           });
  const TrimMap i = TrimMap::restriction({BigInt(0), BigInt(1)}, BigInt(3));
  const Sca small = restrict_sca(big, i);
  const SimFlavor flavor{GlobalKind::Stochastic, TrimFlavor::Injection};
  const SearchResult res = search_simulation(small, big, flavor, SimBounds{1, 1, 0, 2});
  REQUIRE(res.found());
  REQUIRE(res.witness->trims.size() == 1);
  CHECK(res.witness->trims[0].mapping == std::vector<BigInt>{0, 1});
  CHECK(verify_witness(small, big, flavor, *res.witness));
}

TEST_CASE("projection witnesses are found and verify") {
  const Sca b = make_sca(Alphabet(4), binary(), Neighborhood{0}, Neighborhood{0},
                         [](const std::vector<Symbol>& c, const std::vector<Symbol>&) -> Symbol {
                           return c[0] & 1u;
                         });
  const TrimMap pi = TrimMap::projection({BigInt(0), BigInt(1), BigInt(0), BigInt(1)}, BigInt(2));
  const Sca small = project_sca(b, pi);
  const SimFlavor flavor{GlobalKind::Stochastic, TrimFlavor::Projection};
  const SearchResult res = search_simulation(small, b, flavor, SimBounds{1, 1, 0, 2});
  REQUIRE(res.found());
  CHECK(verify_witness(small, b, flavor, *res.witness));
}

TEST_CASE("stochastic witnesses re-verify as non-deterministic ones") {
  const auto [fa, gb] = blank_noise_pair();
  const SimFlavor sflavor{GlobalKind::Stochastic, TrimFlavor::Injection};
  const SearchResult res = search_simulation(fa, gb, sflavor, SimBounds{1, 1, 0, 2});
  REQUIRE(res.found());
  SimWitness w = *res.witness;
  w.flavor = SimFlavor{GlobalKind::NonDeterministic, TrimFlavor::Injection};
  CHECK(verify_witness(fa, gb, w.flavor, w));
}

TEST_CASE("corrupted witness trims") {
  const Sca p = parity_sca();
  const SimFlavor flavor{GlobalKind::Stochastic, TrimFlavor::Injection};
  const SearchResult res = search_simulation(p, p, flavor, SimBounds{1, 1, 0, 1});
  REQUIRE(res.found());

  SimWitness bad = *res.witness;
  bad.trims[0].mapping = {BigInt(1)};  // restrict to {0}: unstable
  CHECK_FALSE(verify_witness(p, p, flavor, bad));

  SimWitness malformed = *res.witness;
  malformed.trims[0].mapping = {BigInt(0), BigInt(0), BigInt(1)};  // not injective
  CHECK_THROWS_AS(verify_witness(p, p, flavor, malformed), InapplicableTrim);
}

TEST_CASE("transitivity composes through trim composition") {
  // c = 3-state with stable pair; b = its restriction; a = b's restriction.
  const Sca c = make_sca(Alphabet(3), binary(), Neighborhood{0}, Neighborhood{0},
                         [](const std::vector<Symbol>& cw, const std::vector<Symbol>& s) -> Symbol {
                           if (cw[0] < 2) return cw[0];
                           return s[0];
                         });
  const TrimMap i2 = TrimMap::restriction({BigInt(0), BigInt(1)}, BigInt(3));
  const Sca b = restrict_sca(c, i2);
  const TrimMap i1 = TrimMap::restriction({BigInt(0)}, BigInt(2));
  const Sca a = restrict_sca(b, i1);

  const SimFlavor flavor{GlobalKind::Stochastic, TrimFlavor::Mixed};
  CHECK(verify_witness(a, b, flavor, SimWitness{{1, 1, 0}, {1, 1, 0}, {i1}, 2, flavor}));
  CHECK(verify_witness(b, c, flavor, SimWitness{{1, 1, 0}, {1, 1, 0}, {i2}, 2, flavor}));

  // Composed witness via the trim-composition normal form.
  const auto [i, pi] = compose_trims({i2, i1}, c);
  const SimWitness composed{{1, 1, 0}, {1, 1, 0}, {i, pi}, 2, flavor};
  CHECK(verify_witness(a, c, flavor, composed));
}

TEST_CASE("gate soundness at tiny sizes") {
  // Exhaustive: no verified S-witness between non-deterministic automata
  // with disjoint prime supports (|Q|=2, rho=0, |R_a|=2 vs |R_b|=3).
  std::uint64_t pairs = 0;
  for (std::uint64_t ta = 0; ta < 16; ++ta) {
    std::vector<Symbol> tablea(4);
    for (int e = 0; e < 4; ++e) tablea[e] = (ta >> e) & 1u;
    const Sca a(Alphabet(2), Alphabet(2), Neighborhood{0}, Neighborhood{0}, tablea);
    if (a.is_deterministic()) continue;
    for (std::uint64_t tb = 0; tb < 64; tb += 7) {  // stride keeps this quick
      std::vector<Symbol> tableb(6);
      for (int e = 0; e < 6; ++e) tableb[e] = (tb >> e) & 1u;
      const Sca b(Alphabet(2), Alphabet(3), Neighborhood{0}, Neighborhood{0}, tableb);
      if (b.is_deterministic()) continue;
      const SearchResult res = search_simulation(
          a, b, {GlobalKind::Stochastic, TrimFlavor::Mixed}, SimBounds{2, 2, 1, 2});
      CHECK_FALSE(res.found());
      CHECK(res.obstruction == Obstruction::PrimeGate);
      ++pairs;
    }
  }
  CHECK(pairs > 20);
}
