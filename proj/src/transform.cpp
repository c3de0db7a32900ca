#include "sca/transform.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "sca/budget.hpp"
#include "sca/core.hpp"
#include "sca/equivalence.hpp"

namespace sca {

namespace {

Cell floor_div(Cell x, std::int64_t m) {
  Cell q = x / m;
  if ((x % m != 0) && ((x < 0) != (m < 0))) --q;
  return q;
}

// t-fold dependence cells of the output cells `base` under neighborhood V,
// as exact sumsets (no interval hulls).
std::set<Cell> sumset(const std::set<Cell>& cells, const std::vector<int>& offsets) {
  std::set<Cell> out;
  for (Cell x : cells)
    for (int v : offsets) out.insert(x + v);
  return out;
}

std::string join_names(const Alphabet& base, const std::vector<Symbol>& word, char sep) {
  std::string out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i) out += sep;
    out += base.name_of(word[i]);
  }
  return out;
}

}  // namespace

std::vector<std::uint64_t> TrimMap::small_mapping() const {
  std::vector<std::uint64_t> out;
  out.reserve(mapping.size());
  for (const BigInt& v : mapping) {
    if (v < 0 || v > BigInt(UINT64_MAX))
      throw InapplicableTrim("trim map entry does not fit a machine integer");
    out.push_back(static_cast<std::uint64_t>(v));
  }
  return out;
}

void TrimMap::validate(const char* what) const {
  if (mapping.empty()) throw InapplicableTrim(std::string(what) + ": empty trim map");
  for (const BigInt& v : mapping)
    if (v < 0 || v >= codomain_size)
      throw InapplicableTrim(std::string(what) + ": trim map entry outside codomain");
  if (kind == TrimKind::Restriction) {
    std::set<BigInt> seen(mapping.begin(), mapping.end());
    if (seen.size() != mapping.size())
      throw InapplicableTrim(std::string(what) + ": restriction map must be injective");
  } else {
    std::set<BigInt> seen(mapping.begin(), mapping.end());
    if (BigInt(seen.size()) != codomain_size)
      throw InapplicableTrim(std::string(what) + ": projection map must be surjective");
  }
}

namespace {

// Shared scan for check_restriction / restrict_sca. Returns the violating
// pair if any, and optionally fills the restricted table.
std::optional<std::pair<std::vector<Symbol>, std::vector<Symbol>>> scan_restriction(
    const Sca& a, const std::vector<std::uint64_t>& img, std::vector<Symbol>* out_table) {
  const std::uint64_t nq_sub = img.size();
  const std::uint64_t ns = pow_sat(a.random().size(), a.r_prime());
  const std::uint64_t nq_words = pow_sat(nq_sub, a.r());
  check_budget(mul_sat(nq_words, ns), "restriction scan");

  // Inverse of the injection over Q, sentinel for "outside image".
  std::vector<Symbol> inv(a.states().size(), UINT32_MAX);
  for (std::uint64_t i = 0; i < nq_sub; ++i) inv[img[i]] = static_cast<Symbol>(i);

  std::vector<Symbol> lifted(a.r());
  for (std::uint64_t qi = 0; qi < nq_words; ++qi) {
    const auto qw = word_of_rank(qi, nq_sub, static_cast<std::int64_t>(a.r()));
    for (std::size_t j = 0; j < a.r(); ++j) lifted[j] = static_cast<Symbol>(img[qw[j]]);
    for (std::uint64_t si = 0; si < ns; ++si) {
      const auto sw = word_of_rank(si, a.random().size(), static_cast<std::int64_t>(a.r_prime()));
      const Symbol out = a.apply_rule(lifted, sw);
      if (inv[out] == UINT32_MAX) return std::pair{lifted, sw};
      if (out_table) out_table->push_back(inv[out]);
    }
  }
  return std::nullopt;
}

std::optional<std::tuple<std::vector<Symbol>, std::vector<Symbol>, std::vector<Symbol>>>
scan_projection(const Sca& a, const std::vector<std::uint64_t>& pi, std::uint64_t target_size) {
  const std::uint64_t nq = pow_sat(a.states().size(), a.r());
  const std::uint64_t ns = pow_sat(a.random().size(), a.r_prime());
  check_budget(mul_sat(nq, ns), "projection scan");

  // Group state words by their cell-wise image; outputs must agree under pi
  // within each group for every random word.
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::pair<std::uint64_t, std::uint64_t>>
      rep;  // (pi(qword) rank, s rank) -> (rep qword rank, pi(out))
  for (std::uint64_t qi = 0; qi < nq; ++qi) {
    const auto qw = word_of_rank(qi, a.states().size(), static_cast<std::int64_t>(a.r()));
    std::uint64_t proj_rank = 0;
    for (Symbol q : qw) proj_rank = proj_rank * target_size + pi[q];
    for (std::uint64_t si = 0; si < ns; ++si) {
      const auto sw = word_of_rank(si, a.random().size(), static_cast<std::int64_t>(a.r_prime()));
      const std::uint64_t out = pi[a.apply_rule(qw, sw)];
      auto [it, fresh] = rep.try_emplace({proj_rank, si}, std::pair{qi, out});
      if (!fresh && it->second.second != out) {
        const auto other =
            word_of_rank(it->second.first, a.states().size(), static_cast<std::int64_t>(a.r()));
        return std::tuple{other, qw, sw};
      }
    }
  }
  return std::nullopt;
}

}  // namespace

bool check_restriction(const Sca& a, const TrimMap& i) {
  if (i.kind != TrimKind::Restriction) throw InapplicableTrim("check_restriction: not a restriction");
  i.validate("check_restriction");
  if (i.codomain_size != BigInt(a.states().size()))
    throw InapplicableTrim("check_restriction: codomain is not the state alphabet");
  return !scan_restriction(a, i.small_mapping(), nullptr).has_value();
}

Sca restrict_sca(const Sca& a, const TrimMap& i) {
  if (i.kind != TrimKind::Restriction) throw InapplicableTrim("restrict: not a restriction");
  i.validate("restrict");
  if (i.codomain_size != BigInt(a.states().size()))
    throw InapplicableTrim("restrict: codomain is not the state alphabet");
  const auto img = i.small_mapping();
  std::vector<Symbol> table;
  table.reserve(pow_sat(img.size(), a.r()) * pow_sat(a.random().size(), a.r_prime()));
  if (auto bad = scan_restriction(a, img, &table)) {
    throw UnstableRestriction("restriction image is not stable under the rule", bad->first,
                              bad->second);
  }
  std::vector<std::string> names;
  const bool named = a.states().has_names();
  for (std::uint64_t q : img) names.push_back(named ? a.states().names()[q] : std::to_string(q));
  return Sca(Alphabet(img.size(), std::move(names)), a.random(), a.nbr(), a.rnd_nbr(),
             std::move(table));
}

bool check_projection(const Sca& a, const TrimMap& pi) {
  if (pi.kind != TrimKind::Projection) throw InapplicableTrim("check_projection: not a projection");
  pi.validate("check_projection");
  if (pi.mapping.size() != a.states().size())
    throw InapplicableTrim("check_projection: domain is not the state alphabet");
  const std::uint64_t target = static_cast<std::uint64_t>(pi.codomain_size);
  return !scan_projection(a, pi.small_mapping(), target).has_value();
}

Sca project_sca(const Sca& a, const TrimMap& pi) {
  if (pi.kind != TrimKind::Projection) throw InapplicableTrim("project: not a projection");
  pi.validate("project");
  if (pi.mapping.size() != a.states().size())
    throw InapplicableTrim("project: domain is not the state alphabet");
  const auto map = pi.small_mapping();
  const std::uint64_t target = static_cast<std::uint64_t>(pi.codomain_size);
  if (auto bad = scan_projection(a, map, target)) {
    throw IncompatibleProjection("rule does not factor through the projection",
                                 std::get<0>(*bad), std::get<1>(*bad), std::get<2>(*bad));
  }
  // Any section works; take the smallest preimage of each target symbol.
  std::vector<Symbol> section(target, UINT32_MAX);
  for (std::uint64_t q = a.states().size(); q-- > 0;) section[map[q]] = static_cast<Symbol>(q);

  std::vector<Symbol> lifted(a.r());
  const std::uint64_t nq_words = pow_sat(target, a.r());
  const std::uint64_t ns = pow_sat(a.random().size(), a.r_prime());
  std::vector<Symbol> table;
  table.reserve(mul_sat(nq_words, ns));
  for (std::uint64_t qi = 0; qi < nq_words; ++qi) {
    const auto qw = word_of_rank(qi, target, static_cast<std::int64_t>(a.r()));
    for (std::size_t j = 0; j < a.r(); ++j) lifted[j] = section[qw[j]];
    for (std::uint64_t si = 0; si < ns; ++si) {
      const auto sw = word_of_rank(si, a.random().size(), static_cast<std::int64_t>(a.r_prime()));
      table.push_back(static_cast<Symbol>(map[a.apply_rule(lifted, sw)]));
    }
  }
  return Sca(Alphabet(target), a.random(), a.nbr(), a.rnd_nbr(), std::move(table));
}

Sca apply_trim_pair(const Sca& a, const TrimMap& i, const TrimMap& pi) {
  return project_sca(restrict_sca(a, i), pi);
}

std::pair<TrimMap, TrimMap> compose_trims(const std::vector<TrimMap>& trims, const Sca& a,
                                          std::int64_t verify_window) {
  // Normal form maintained: sub (ascending members of Q kept by the combined
  // restriction) and proj (their images in the current final alphabet).
  std::vector<std::uint64_t> sub(a.states().size());
  for (std::uint64_t q = 0; q < sub.size(); ++q) sub[q] = q;
  std::vector<std::uint64_t> proj = sub;
  std::uint64_t final_size = a.states().size();

  Sca seq = a;  // sequential application, for the verification below
  for (const TrimMap& t : trims) {
    t.validate("compose_trims");
    if (t.kind == TrimKind::Restriction) {
      if (t.codomain_size != BigInt(final_size))
        throw InapplicableTrim("compose_trims: restriction codomain mismatch");
      seq = restrict_sca(seq, t);
      const auto img = t.small_mapping();
      // j^-1 over the final alphabet.
      std::vector<std::uint64_t> inv(final_size, UINT64_MAX);
      for (std::uint64_t x = 0; x < img.size(); ++x) inv[img[x]] = x;
      std::vector<std::uint64_t> nsub, nproj;
      for (std::size_t idx = 0; idx < sub.size(); ++idx) {
        if (inv[proj[idx]] != UINT64_MAX) {
          nsub.push_back(sub[idx]);
          nproj.push_back(inv[proj[idx]]);
        }
      }
      sub = std::move(nsub);
      proj = std::move(nproj);
      final_size = img.size();
    } else {
      if (t.mapping.size() != final_size)
        throw InapplicableTrim("compose_trims: projection domain mismatch");
      seq = project_sca(seq, t);
      const auto map = t.small_mapping();
      for (auto& p : proj) p = map[p];
      final_size = static_cast<std::uint64_t>(t.codomain_size);
    }
  }

  std::vector<BigInt> sub_big(sub.begin(), sub.end());
  std::vector<BigInt> proj_big(proj.begin(), proj.end());
  TrimMap i = TrimMap::restriction(std::move(sub_big), BigInt(a.states().size()));
  TrimMap pi = TrimMap::projection(std::move(proj_big), BigInt(final_size));

  const Sca combined = apply_trim_pair(a, i, pi);
  if (!one_step_equal(seq, combined, verify_window).equal())
    throw InapplicableTrim("compose_trims: combined pair does not reproduce the sequence");
  return {std::move(i), std::move(pi)};
}

Alphabet packed_alphabet(const Alphabet& base, std::uint64_t m) {
  const std::uint64_t size = pow_sat(base.size(), m);
  if (size == UINT64_MAX) throw BudgetExceeded("packed alphabet overflows");
  if (size > (std::uint64_t{1} << 20)) return Alphabet(size);
  std::vector<std::string> names;
  names.reserve(size);
  for (std::uint64_t rank = 0; rank < size; ++rank)
    names.push_back(join_names(base, word_of_rank(rank, base.size(), static_cast<std::int64_t>(m)),
                               '|'));
  return Alphabet(size, std::move(names));
}

Alphabet rescaled_random_alphabet(const Alphabet& base, std::uint64_t m, std::uint64_t t) {
  const std::uint64_t layer = pow_sat(base.size(), m);
  const std::uint64_t size = pow_sat(layer, t);
  if (size == UINT64_MAX) throw BudgetExceeded("rescaled random alphabet overflows");
  if (size > (std::uint64_t{1} << 20)) return Alphabet(size);
  std::vector<std::string> names;
  names.reserve(size);
  for (std::uint64_t rank = 0; rank < size; ++rank) {
    const auto layers = word_of_rank(rank, layer, static_cast<std::int64_t>(t));
    std::string name;
    for (std::uint64_t j = 0; j < t; ++j) {
      if (j) name += ';';
      name += join_names(base, word_of_rank(layers[j], base.size(), static_cast<std::int64_t>(m)),
                         '|');
    }
    names.push_back(std::move(name));
  }
  return Alphabet(size, std::move(names));
}

namespace {

struct RescalePlan {
  std::vector<Cell> out_cells;                 // cells of the output block
  std::vector<std::set<Cell>> row_cells;       // row j cells, j = 0..t
  std::vector<std::set<Cell>> rnd_cells;       // step j random cells, j = 1..t
  std::vector<int> v_plus;                     // packed state offsets, ascending
  std::vector<int> v_plus_rnd;                 // packed random offsets, ascending
};

RescalePlan plan_rescale(const Sca& a, const RescaleParams& p) {
  RescalePlan plan;
  const std::int64_t m = static_cast<std::int64_t>(p.m);
  std::set<Cell> cur;
  for (std::int64_t i = 0; i < m; ++i) cur.insert(p.k + i);
  plan.row_cells.assign(p.t + 1, {});
  plan.rnd_cells.assign(p.t + 1, {});
  plan.row_cells[p.t] = cur;
  for (std::uint64_t j = p.t; j >= 1; --j) {
    plan.rnd_cells[j] = sumset(plan.row_cells[j], a.rnd_nbr().offsets);
    plan.row_cells[j - 1] = sumset(plan.row_cells[j], a.nbr().offsets);
  }
  std::set<int> vp, vpr;
  for (Cell x : plan.row_cells[0]) vp.insert(static_cast<int>(floor_div(x, m)));
  for (std::uint64_t j = 1; j <= p.t; ++j)
    for (Cell x : plan.rnd_cells[j]) vpr.insert(static_cast<int>(floor_div(x, m)));
  plan.v_plus.assign(vp.begin(), vp.end());
  plan.v_plus_rnd.assign(vpr.begin(), vpr.end());
  for (std::int64_t i = 0; i < m; ++i) plan.out_cells.push_back(p.k + i);
  return plan;
}

}  // namespace

Sca rescale(const Sca& a, const RescaleParams& p, ExecMode mode) {
  if (p.m < 1 || p.t < 1) throw Error("rescale: m and t must be >= 1");
  const RescalePlan plan = plan_rescale(a, p);
  const std::int64_t m = static_cast<std::int64_t>(p.m);

  const Alphabet packed_q = packed_alphabet(a.states(), p.m);
  const Alphabet packed_r = rescaled_random_alphabet(a.random(), p.m, p.t);
  const std::uint64_t r_plus = plan.v_plus.size();
  const std::uint64_t r_plus_rnd = plan.v_plus_rnd.size();

  const std::uint64_t n_entries =
      mul_sat(pow_sat(packed_q.size(), r_plus), pow_sat(packed_r.size(), r_plus_rnd));
  check_budget(n_entries, "rescale table");

  // Dense scratch rows over the hull of each cell set; cells outside the
  // exact dependence sets stay unset and are never read.
  struct Layout {
    Cell lo = 0;
    std::int64_t len = 0;
  };
  const auto hull = [](const std::set<Cell>& s) {
    Layout l;
    if (s.empty()) return l;
    l.lo = *s.begin();
    l.len = *s.rbegin() - *s.begin() + 1;
    return l;
  };
  std::vector<Layout> row_hull(p.t + 1), rnd_hull(p.t + 1);
  for (std::uint64_t j = 0; j <= p.t; ++j) row_hull[j] = hull(plan.row_cells[j]);
  for (std::uint64_t j = 1; j <= p.t; ++j) rnd_hull[j] = hull(plan.rnd_cells[j]);

  const std::uint64_t qsize = a.states().size();
  const std::uint64_t rsize = a.random().size();
  const std::uint64_t layer_size = pow_sat(rsize, p.m);

  const auto fill = [&](std::uint64_t idx) -> Symbol {
    // Decode packed operands.
    const std::uint64_t rnd_part = pow_sat(packed_r.size(), r_plus_rnd);
    std::uint64_t qidx = idx / rnd_part;
    std::uint64_t sidx = idx % rnd_part;
    const auto qword = word_of_rank(qidx, packed_q.size(), static_cast<std::int64_t>(r_plus));
    const auto sword = word_of_rank(sidx, packed_r.size(), static_cast<std::int64_t>(r_plus_rnd));

    // Unpack states of the blocks in V+ into row 0.
    std::vector<Symbol> row(static_cast<std::size_t>(row_hull[0].len), UINT32_MAX);
    for (std::uint64_t bi = 0; bi < r_plus; ++bi) {
      const Cell base = static_cast<Cell>(plan.v_plus[bi]) * m;
      const auto cells = word_of_rank(qword[bi], qsize, m);
      for (std::int64_t i = 0; i < m; ++i) {
        const Cell z = base + i;
        if (z >= row_hull[0].lo && z < row_hull[0].lo + row_hull[0].len)
          row[static_cast<std::size_t>(z - row_hull[0].lo)] = cells[static_cast<std::size_t>(i)];
      }
    }
    // Unpack random layers per step.
    std::vector<std::vector<Symbol>> rnd(p.t + 1);
    for (std::uint64_t j = 1; j <= p.t; ++j)
      rnd[j].assign(static_cast<std::size_t>(std::max<std::int64_t>(rnd_hull[j].len, 0)),
                    UINT32_MAX);
    for (std::uint64_t bi = 0; bi < r_plus_rnd; ++bi) {
      const Cell base = static_cast<Cell>(plan.v_plus_rnd[bi]) * m;
      const auto layers = word_of_rank(sword[bi], layer_size, static_cast<std::int64_t>(p.t));
      for (std::uint64_t j = 1; j <= p.t; ++j) {
        const auto cells = word_of_rank(layers[j - 1], rsize, m);
        for (std::int64_t i = 0; i < m; ++i) {
          const Cell z = base + i;
          if (z >= rnd_hull[j].lo && z < rnd_hull[j].lo + rnd_hull[j].len)
            rnd[j][static_cast<std::size_t>(z - rnd_hull[j].lo)] =
                cells[static_cast<std::size_t>(i)];
        }
      }
    }

    // Evaluate F^t over the exact dependence sets.
    std::vector<Symbol> qb(a.r()), sb(a.r_prime());
    std::vector<Symbol> prev = std::move(row);
    Layout prev_hull = row_hull[0];
    for (std::uint64_t j = 1; j <= p.t; ++j) {
      std::vector<Symbol> next(static_cast<std::size_t>(row_hull[j].len), UINT32_MAX);
      for (Cell z : plan.row_cells[j]) {
        for (std::size_t i = 0; i < a.r(); ++i)
          qb[i] = prev[static_cast<std::size_t>(z + a.nbr().offsets[i] - prev_hull.lo)];
        for (std::size_t i = 0; i < a.r_prime(); ++i)
          sb[i] = rnd[j][static_cast<std::size_t>(z + a.rnd_nbr().offsets[i] - rnd_hull[j].lo)];
        next[static_cast<std::size_t>(z - row_hull[j].lo)] = a.apply_rule(qb, sb);
      }
      prev = std::move(next);
      prev_hull = row_hull[j];
    }

    std::uint64_t out = 0;
    for (Cell z : plan.out_cells)
      out = out * qsize + prev[static_cast<std::size_t>(z - prev_hull.lo)];
    return static_cast<Symbol>(out);
  };

  std::vector<Symbol> table(n_entries);
  fill_table(table, fill, mode);
  return Sca(packed_q, packed_r, Neighborhood(plan.v_plus), Neighborhood(plan.v_plus_rnd),
             std::move(table),
             a.name().empty() ? "" : a.name() + "^(" + std::to_string(p.m) + "," +
                                         std::to_string(p.t) + "," + std::to_string(p.k) + ")");
}

RescaledKernel::RescaledKernel(std::shared_ptr<const WindowKernel> inner, RescaleParams p)
    : inner_(std::move(inner)), p_(p), packed_(packed_alphabet(inner_->state_alphabet(), p.m)) {
  if (p_.m < 1 || p_.t < 1) throw Error("rescaled kernel: m and t must be >= 1");
}

std::pair<Cell, Cell> RescaledKernel::context_span(const Window& w) const {
  const std::int64_t m = static_cast<std::int64_t>(p_.m);
  Window base{m * w.z + p_.k, m * w.L};
  Cell lo = base.z;
  Cell hi = base.z + base.L - 1;
  for (std::uint64_t j = 0; j < p_.t; ++j) {
    const auto s = inner_->context_span(Window{lo, hi - lo + 1});
    lo = s.first;
    hi = s.second;
  }
  return {floor_div(lo, m), floor_div(hi, m)};
}

CylinderDist RescaledKernel::one_step(const Word& context, const Window& w, ExecMode mode) const {
  if (!(context.alphabet == packed_)) throw AlphabetMismatch("rescaled kernel: packed context");
  const std::int64_t m = static_cast<std::int64_t>(p_.m);
  const Alphabet& base_alph = inner_->state_alphabet();

  // Unpack the context to base cells.
  std::vector<Symbol> base_syms;
  base_syms.reserve(static_cast<std::size_t>(context.length() * m));
  for (std::int64_t i = 0; i < context.length(); ++i) {
    const auto cells = word_of_rank(context.symbols[static_cast<std::size_t>(i)],
                                    base_alph.size(), m);
    base_syms.insert(base_syms.end(), cells.begin(), cells.end());
  }
  const Word base_ctx(base_alph, std::move(base_syms), context.anchor * m);

  const Window base_w{m * w.z + p_.k, m * w.L};
  const CylinderDist base_d = iterate_dist(*inner_, base_ctx, base_w, p_.t, mode);

  // Big-endian nesting makes the packed rank numerically equal to the base
  // rank; only the alphabet and anchor change.
  std::vector<std::pair<std::uint64_t, Rational>> entries(base_d.entries().begin(),
                                                          base_d.entries().end());
  return CylinderDist(packed_, w.z, w.L, std::move(entries));
}

RescaleParams compose_rescale(const RescaleParams& first, const RescaleParams& then) {
  return RescaleParams{first.m * then.m, first.t * then.t,
                       static_cast<std::int64_t>(first.m) * then.k +
                           static_cast<std::int64_t>(then.t) * first.k};
}

}  // namespace sca
