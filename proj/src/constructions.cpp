#include "sca/constructions.hpp"

#include "sca/core.hpp"

namespace sca {

Sca parity_sca() {
  const Alphabet q(3, {"#", "0", "1"});
  const Alphabet r(2, {"0", "1"});
  // f(c_-1, c_0, c_+1, s_-1, s_0):
  //   # if c_0 = #; else s_0 if c_-1 = #; else s_-1 if c_+1 = #;
  //   else s_-1 + s_0 mod 2.
  return make_sca(q, r, Neighborhood{-1, 0, 1}, Neighborhood{-1, 0},
                  [](const std::vector<Symbol>& c, const std::vector<Symbol>& s) -> Symbol {
                    const Symbol cm1 = c[0], c0 = c[1], cp1 = c[2];
                    const Symbol sm1 = s[0], s0 = s[1];
                    if (c0 == kParityHash) return kParityHash;
                    if (cm1 == kParityHash) return kParityZero + s0;
                    if (cp1 == kParityHash) return kParityZero + sm1;
                    return kParityZero + ((sm1 + s0) & 1u);
                  },
                  "parity");
}

std::pair<Sca, Sca> blank_noise_pair() {
  const Alphabet b(2, {"0", "1"});
  Sca noise = make_sca(b, b, Neighborhood{0}, Neighborhood{0},
                       [](const std::vector<Symbol>& c, const std::vector<Symbol>& s) -> Symbol {
                         (void)c;
                         return s[0];
                       },
                       "blank-noise-F");
  Sca xor_form = make_sca(b, b, Neighborhood{0}, Neighborhood{0},
                          [](const std::vector<Symbol>& c, const std::vector<Symbol>& s) -> Symbol {
                            return (c[0] + s[0]) & 1u;
                          },
                          "blank-noise-G");
  return {std::move(noise), std::move(xor_form)};
}

Coupling blank_noise_coupling(const Word& context) {
  if (context.length() < 1) throw InsufficientContext("blank_noise_coupling: empty context");
  const Symbol c0 = context.at(0);
  const Alphabet b(2, {"0", "1"});
  Coupling g;
  g.left_alphabet = b;
  g.right_alphabet = b;
  g.width = 1;
  const Rational half = make_fraction(1, 2);
  // F(c,s) = s agrees with G(c,s') = c + s' exactly when s = c_0 + s'.
  for (std::uint64_t sp = 0; sp < 2; ++sp)
    g.entries.push_back({{(c0 + sp) & 1u, sp}, half});
  std::sort(g.entries.begin(), g.entries.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  return g;
}

PcaEmbedding pca_embed(const Sca& a) {
  const std::uint64_t nq = a.states().size();
  const std::uint64_t nr = a.random().size();

  // States Q plus QxR; pair (q, s) sits at nq + q*nr + s.
  std::vector<std::string> names;
  const auto qname = [&](Symbol q) { return a.states().name_of(q); };
  const auto rname = [&](Symbol s) { return a.random().name_of(s); };
  for (std::uint64_t q = 0; q < nq; ++q) names.push_back(qname(static_cast<Symbol>(q)));
  for (std::uint64_t q = 0; q < nq; ++q)
    for (std::uint64_t s = 0; s < nr; ++s)
      names.push_back("(" + qname(static_cast<Symbol>(q)) + "," + rname(static_cast<Symbol>(s)) +
                      ")");
  const Alphabet qb(nq + nq * nr, std::move(names));

  // Neighborhood covers V, V' and the cell itself.
  std::set<int> offs(a.nbr().offsets.begin(), a.nbr().offsets.end());
  offs.insert(a.rnd_nbr().offsets.begin(), a.rnd_nbr().offsets.end());
  offs.insert(0);
  const std::vector<int> vb(offs.begin(), offs.end());
  std::vector<std::size_t> v_idx, vp_idx;
  for (int v : a.nbr().offsets)
    v_idx.push_back(std::distance(vb.begin(), std::find(vb.begin(), vb.end(), v)));
  for (int v : a.rnd_nbr().offsets)
    vp_idx.push_back(std::distance(vb.begin(), std::find(vb.begin(), vb.end(), v)));
  const std::size_t center = std::distance(vb.begin(), std::find(vb.begin(), vb.end(), 0));

  Sca b = make_sca(
      qb, a.random(), Neighborhood(vb), Neighborhood{0},
      [&, nq, nr](const std::vector<Symbol>& cw, const std::vector<Symbol>& sw) -> Symbol {
        const Symbol me = cw[center];
        if (me < nq) {
          // Phase one: pair the state with this cell's fresh random symbol.
          return static_cast<Symbol>(nq + me * nr + sw[0]);
        }
        // Phase two: apply a's rule to the stored components. Plain states
        // in the window (mixed configurations, excluded by the restriction)
        // read as (q, 0).
        std::vector<Symbol> qa(v_idx.size()), sa(vp_idx.size());
        for (std::size_t j = 0; j < v_idx.size(); ++j) {
          const Symbol nb = cw[v_idx[j]];
          qa[j] = nb < nq ? nb : static_cast<Symbol>((nb - nq) / nr);
        }
        for (std::size_t j = 0; j < vp_idx.size(); ++j) {
          const Symbol nb = cw[vp_idx[j]];
          sa[j] = nb < nq ? 0 : static_cast<Symbol>((nb - nq) % nr);
        }
        return a.apply_rule(qa, sa);
      },
      a.name().empty() ? "pca-embed" : "pca-embed(" + a.name() + ")");

  PcaEmbedding out{std::move(b), TrimMap::identity_restriction(nq), {}};
  out.injection.codomain_size = BigInt(nq + nq * nr);
  out.witness.left = RescaleParams{1, 1, 0};
  out.witness.right = RescaleParams{1, 2, 0};
  out.witness.trims = {out.injection};
  out.witness.verified_bound = 3;
  out.witness.flavor = SimFlavor{GlobalKind::Stochastic, TrimFlavor::Injection};
  return out;
}

SymbolGenMap rand_symbol_map(std::uint64_t target, std::uint64_t source) {
  if (target < 1 || source < 2) throw Error("rand_symbol_map: need |R| >= 1, |R_U| >= 2");
  SymbolGenMap g;
  g.source_size = source;
  g.target_size = target;
  std::uint64_t w = 1;
  std::uint64_t power = source;
  while (power < target) {
    power = mul_sat(power, source);
    ++w;
  }
  if (prime_factors(source).contains(prime_factors(target))) {
    while (power % target != 0) {
      power = mul_sat(power, source);
      ++w;
    }
  }
  g.width = w;
  g.uniform = (power % target == 0);
  return g;
}

}  // namespace sca
