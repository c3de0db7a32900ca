#include <algorithm>
#include <map>
#include <set>

#include "sca/budget.hpp"
#include "sca/constructions.hpp"
#include "sca/core.hpp"

#ifdef SCA_HAVE_OPENMP
#include <omp.h>
#endif

// The universal machine. One Turing head per block cycles through four
// sub-routines: generate raw random digits into RSYM, ferry RSYM and QSTATE
// copies into the neighbors' NBR sections, filter the on-tape transition
// table against the gathered operands and write the selected value back into
// QSTATE, then clean every working field. All head movement is
// content-independent (only written values depend on tape content), so every
// block's head follows the same trajectory and heads keep pairwise distance
// m forever. SYNC holds the two countdown constants and their working
// copies; the countdowns after the generate and lookup phases realize the
// resynchronization hook.
//
// The alphabet and head program depend only on the prime set (through
// D = |R_U|); everything specific to a simulated automaton lives on the
// tape: field widths, table contents, countdown constants.

namespace sca {

namespace {

// Cell kinds. Section kinds are per neighborhood offset so the fixed head
// program can navigate by tape content alone.
enum Kind : std::uint32_t {
  SY_M1, SY_W1, SY_M3, SY_W3,
  T_KQ, T_KR, T_VAL,
  QST, RSY,
  NBQ_M1, NBQ_0, NBQ_P1,
  NBR_M1, NBR_0, NBR_P1,
  KIND_COUNT
};

inline bool is_nbq(std::uint32_t k) { return k == NBQ_M1 || k == NBQ_0 || k == NBQ_P1; }
inline bool is_nbr(std::uint32_t k) { return k == NBR_M1 || k == NBR_0 || k == NBR_P1; }
inline bool is_table(std::uint32_t k) { return k == T_KQ || k == T_KR || k == T_VAL; }
inline bool is_key(std::uint32_t k) { return k == T_KQ || k == T_KR; }
inline bool is_sync(std::uint32_t k) { return k <= SY_W3; }

// Head modes. `target` distinguishes the two countdowns (0/1) and the six
// ferry targets; `carry` holds one digit; `flag` is the mode's spare bit
// (zero flag, borrow, armed, cursor-advance).
enum Mode : std::uint32_t {
  P1_GEN, P1_HOME,
  CD_COPYSEEK, CD_PUT, CD_BACK, CD_PREP, CD_TICKF, CD_TICKB,
  FER_GOSRC, FER_SCAN, FER_GO, FER_SEEKSTART, FER_DROP, FER_UNM,
  P3_OPSEEK, P3_TOTBL, P3_FILTER, P3_VALGO, P3_VALSWEEP, P3_QWRITE, P3_QCHECK,
  P3_RESTGO, P3_RESTSWEEP, CD_GOSYNC,
  P4_SWEEP, P4_HOME,
  MODE_COUNT
};

struct Head {
  std::uint32_t mode = P1_GEN;
  std::uint32_t carry = 0;   // 0..Dmax-1
  std::uint32_t target = 0;  // countdown id or ferry target 0..5
  std::uint32_t flag = 0;
};

struct UCell {
  std::uint32_t kind = SY_M1;
  bool start = false;
  bool mark = false;
  std::uint32_t digit = 0;
  bool has_head = false;
  Head head;
};

struct Codec {
  std::uint64_t dmax;        // digit radix
  std::uint64_t head_codes;  // MODE_COUNT * dmax * 6 * 2

  explicit Codec(std::uint64_t d) : dmax(std::max<std::uint64_t>(2, d)) {
    head_codes = static_cast<std::uint64_t>(MODE_COUNT) * dmax * 6 * 2;
  }

  std::uint64_t alphabet_size() const { return KIND_COUNT * 2 * 2 * dmax * (1 + head_codes); }

  Symbol pack(const UCell& c) const {
    std::uint64_t head = 0;
    if (c.has_head) {
      head = 1 + ((static_cast<std::uint64_t>(c.head.mode) * dmax + c.head.carry) * 6 +
                  c.head.target) *
                     2 +
             c.head.flag;
    }
    const std::uint64_t content =
        ((static_cast<std::uint64_t>(c.kind) * 2 + (c.start ? 1 : 0)) * 2 + (c.mark ? 1 : 0)) *
            dmax +
        c.digit;
    return static_cast<Symbol>(content * (1 + head_codes) + head);
  }

  UCell unpack(Symbol s) const {
    UCell c;
    std::uint64_t v = s;
    std::uint64_t head = v % (1 + head_codes);
    v /= (1 + head_codes);
    c.digit = static_cast<std::uint32_t>(v % dmax);
    v /= dmax;
    c.mark = v % 2;
    v /= 2;
    c.start = v % 2;
    v /= 2;
    c.kind = static_cast<std::uint32_t>(v);
    if (head > 0) {
      c.has_head = true;
      --head;
      c.head.flag = static_cast<std::uint32_t>(head % 2);
      head /= 2;
      c.head.target = static_cast<std::uint32_t>(head % 6);
      head /= 6;
      c.head.carry = static_cast<std::uint32_t>(head % dmax);
      c.head.mode = static_cast<std::uint32_t>(head / dmax);
    }
    return c;
  }
};

// One head step: what the head writes here, where it moves, and its next
// state. The write may be "the cell's fresh random symbol" (generate); move
// and next state never depend on randomness, which is what lets neighbor
// cells track head arrivals in a plain PCA.
struct Action {
  bool write_digit = false;
  std::uint32_t digit = 0;       // used when write_digit && !write_random
  bool write_random = false;     // digit := own random symbol
  bool set_mark = false, clear_mark = false;
  int move = 0;  // -1, 0, +1
  Head next;
};

// Ferry targets, in execution order.
struct FerrySpec {
  std::uint32_t src_kind;     // RSY or QST
  std::uint32_t target_kind;  // section kind
  int dir;                    // deposit walk direction: -1 left, +1 right
  bool arm;                   // cross one SY_M1 start before stopping
};
constexpr FerrySpec kFerries[6] = {
    {RSY, NBR_P1, -1, false},  // raw to left neighbor
    {RSY, NBR_0, +1, false},   // raw to own section
    {RSY, NBR_M1, +1, true},   // raw to right neighbor
    {QST, NBQ_P1, -1, false},  // state to left neighbor
    {QST, NBQ_0, +1, false},   // state to own section
    {QST, NBQ_M1, +1, true},   // state to right neighbor
};

std::uint32_t sync_master(std::uint32_t c) { return c == 0 ? SY_M1 : SY_M3; }
std::uint32_t sync_work(std::uint32_t c) { return c == 0 ? SY_W1 : SY_W3; }

// FER_GOSRC walk direction: returning to the source after a deposit (or on
// first entry). flag doubles as the arm bit for right-neighbor targets and
// as the direction bit for target 3 (whose entry comes from the left but
// whose returns come from the left block).
int gosrc_direction(std::uint32_t target, std::uint32_t flag) {
  switch (target) {
    case 0: return +1;                    // deposits land left of the source
    case 1: return -1;
    case 2: return -1;                    // armed leftward walk
    case 3: return flag ? +1 : -1;        // entry from RSY start vs return
    case 4: return -1;
    case 5: return -1;                    // armed leftward walk
  }
  return +1;
}

Action head_action(const Head& h, const UCell& cell) {
  Action a;
  a.next = h;
  switch (h.mode) {
    case P1_GEN:
      if (cell.kind == RSY) {
        a.write_digit = true;
        a.write_random = true;
        a.move = +1;
      } else if (is_nbq(cell.kind)) {
        a.next.mode = P1_HOME;
        a.move = -1;
      } else {
        a.move = +1;
      }
      return a;
    case P1_HOME:
      if (cell.kind == SY_M1 && cell.start) {
        a.next = Head{CD_COPYSEEK, 0, 0, 0};
        a.move = 0;
        return a;
      }
      a.move = -1;
      return a;

    case CD_COPYSEEK: {
      const std::uint32_t mk = sync_master(h.target);
      if (cell.kind == mk && !cell.mark) {
        a.set_mark = true;
        a.next = Head{CD_PUT, cell.digit, h.target, 0};
        a.move = +1;
        return a;
      }
      if (cell.kind == sync_work(h.target)) {
        a.next = Head{CD_PREP, 0, h.target, 0};
        a.move = -1;
        return a;
      }
      a.move = +1;
      return a;
    }
    case CD_PUT:
      if (cell.kind == sync_work(h.target) && !cell.mark) {
        a.write_digit = true;
        a.digit = h.carry;
        a.set_mark = true;
        a.next = Head{CD_BACK, 0, h.target, 0};
        a.move = -1;
        return a;
      }
      a.move = +1;
      return a;
    case CD_BACK:
      if (cell.kind == sync_master(h.target) && cell.start) {
        a.next = Head{CD_COPYSEEK, 0, h.target, 0};
        a.move = 0;
        return a;
      }
      a.move = -1;
      return a;
    case CD_PREP: {
      const std::uint32_t mk = sync_master(h.target);
      if (cell.kind == mk) {
        a.clear_mark = true;
        if (cell.start) {
          a.next = Head{CD_TICKF, 0, h.target, 1};
          a.move = +1;
          return a;
        }
      }
      a.move = -1;
      return a;
    }
    case CD_TICKF: {
      const std::uint32_t wk = sync_work(h.target);
      if (cell.kind == wk) {
        a.clear_mark = true;
        a.next.flag = h.flag && cell.digit == 0;
        a.move = +1;
        return a;
      }
      if (cell.kind == sync_master(h.target)) {
        a.move = +1;
        return a;
      }
      // Left the work field: countdown decision point.
      if (h.flag) {
        if (h.target == 0) {
          // At SY_M3's first cell; the generate source is to the right.
          a.next = Head{FER_GOSRC, 0, 0, 1};
          a.move = +1;
        } else {
          a.next = Head{P4_SWEEP, 0, 0, 0};
          a.move = +1;  // at the first table cell
        }
        return a;
      }
      a.next = Head{CD_TICKB, 0, h.target, 1};
      a.move = -1;
      return a;
    }
    case CD_TICKB: {
      const std::uint32_t wk = sync_work(h.target);
      if (cell.kind == wk) {
        if (h.flag) {
          a.write_digit = true;
          if (cell.digit == 0) {
            a.digit = 1;  // borrow propagates
          } else {
            a.digit = cell.digit - 1;
            a.next.flag = 0;
          }
        }
        if (cell.start) {
          a.next.mode = CD_TICKF;
          a.next.flag = 1;
          a.move = 0;  // rescan the whole work field for the zero check
          return a;
        }
        a.move = -1;
        return a;
      }
      a.move = -1;
      return a;
    }

    // flag carries the arm bit for right-neighbor targets (2, 5) and the
    // walk direction for target 0/3 entries: see gosrc_direction.
    case FER_GOSRC: {
      const FerrySpec& f = kFerries[h.target];
      const bool armed_ok = !f.arm || h.flag;
      if (cell.kind == f.src_kind && cell.start && armed_ok) {
        a.next = Head{FER_SCAN, 0, h.target, 0};
        a.move = 0;
        return a;
      }
      if (f.arm && cell.kind == SY_M1 && cell.start) a.next.flag = 1;
      a.move = gosrc_direction(h.target, h.flag);
      return a;
    }
    case FER_SCAN: {
      const FerrySpec& f = kFerries[h.target];
      if (cell.kind == f.src_kind && !cell.mark) {
        a.set_mark = true;
        a.next = Head{FER_GO, cell.digit, h.target, 0};
        a.move = f.dir;
        return a;
      }
      if (cell.kind == f.src_kind) {
        a.move = +1;
        return a;
      }
      // Source exhausted: unmark it and move to the next target.
      a.next = Head{FER_UNM, 0, h.target, 0};
      a.move = -1;
      return a;
    }
    case FER_GO: {
      const FerrySpec& f = kFerries[h.target];
      if (f.arm && !h.flag) {
        if (cell.kind == SY_M1 && cell.start) a.next.flag = 1;
        a.move = +1;
        return a;
      }
      if (cell.kind == f.target_kind) {
        if (f.dir == -1 && !cell.start) {
          // Approached from the right: rewind to the section start first.
          a.next = Head{FER_SEEKSTART, h.carry, h.target, 0};
          a.move = -1;
          return a;
        }
        a.next = Head{FER_DROP, h.carry, h.target, 0};
        a.move = 0;
        return a;
      }
      // Section missing in the target block: abort this digit and return.
      bool abort = false;
      switch (h.target) {
        case 0: abort = is_nbq(cell.kind); break;
        case 1: abort = cell.kind == NBR_P1 || cell.kind == SY_M1; break;
        case 2: abort = cell.kind == NBR_0 || cell.kind == NBR_P1 ||
                        (cell.kind == SY_M1 && cell.start); break;
        case 3: abort = (is_nbq(cell.kind) && cell.kind != NBQ_P1) || cell.kind == RSY; break;
        case 4: abort = cell.kind == NBQ_P1 || is_nbr(cell.kind) || cell.kind == SY_M1; break;
        case 5: abort = cell.kind == NBQ_0 || cell.kind == NBQ_P1 || is_nbr(cell.kind); break;
      }
      if (abort) {
        a.next = Head{FER_GOSRC, 0, h.target,
                      static_cast<std::uint32_t>((h.target == 0 || h.target == 3) ? 1 : 0)};
        a.move = gosrc_direction(h.target, a.next.flag);
        return a;
      }
      a.move = f.dir;
      return a;
    }
    case FER_SEEKSTART: {
      const FerrySpec& f = kFerries[h.target];
      if (cell.kind == f.target_kind && cell.start) {
        a.next = Head{FER_DROP, h.carry, h.target, 0};
        a.move = 0;
        return a;
      }
      a.move = -1;
      return a;
    }
    case FER_DROP: {
      const FerrySpec& f = kFerries[h.target];
      if (cell.kind == f.target_kind && !cell.mark) {
        a.write_digit = true;
        a.digit = h.carry;
        a.set_mark = true;
        a.next = Head{FER_GOSRC, 0, h.target,
                      static_cast<std::uint32_t>((h.target == 0 || h.target == 3) ? 1 : 0)};
        a.move = gosrc_direction(h.target, a.next.flag);
        return a;
      }
      a.move = +1;
      return a;
    }
    case FER_UNM: {
      const FerrySpec& f = kFerries[h.target];
      if (cell.kind == f.src_kind) {
        a.clear_mark = true;
        if (cell.start) {
          if (h.target + 1 < 6) {
            if (kFerries[h.target + 1].src_kind == f.src_kind) {
              // Same source field: scan it afresh from here.
              a.next = Head{FER_SCAN, 0, h.target + 1, 0};
              a.move = 0;
            } else {
              // RSY to QST handoff: the new source starts just left of us.
              a.next = Head{FER_GOSRC, 0, h.target + 1, 0};
              a.move = -1;
            }
            return a;
          }
          a.next = Head{P3_OPSEEK, 0, 0, 0};
          a.move = +1;
          return a;
        }
        a.move = -1;
        return a;
      }
      a.move = -1;
      return a;
    }

    case P3_OPSEEK:
      // Operand cells carry the ferry deposit marks; consuming one clears
      // its mark, so the marked cells are exactly the unread operands.
      if ((is_nbq(cell.kind) || is_nbr(cell.kind)) && cell.mark) {
        a.clear_mark = true;
        a.next = Head{P3_TOTBL, cell.digit, 0, 0};
        a.move = -1;
        return a;
      }
      if (cell.kind == SY_M1) {
        a.next = Head{P3_VALGO, 0, 0, 0};
        a.move = -1;
        return a;
      }
      a.move = +1;
      return a;
    case P3_TOTBL:
      if (is_sync(cell.kind)) {
        a.next = Head{P3_FILTER, h.carry, 0, 0};
        a.move = +1;
        return a;
      }
      a.move = -1;
      return a;
    case P3_FILTER:
      if (is_key(cell.kind) && cell.mark) {
        a.clear_mark = true;
        a.next.flag = (cell.digit == h.carry) ? 1 : 0;
        a.move = +1;
        return a;
      }
      if (h.flag && is_table(cell.kind)) {
        a.set_mark = true;
        a.next.flag = 0;
        a.move = +1;
        return a;
      }
      if (cell.kind == QST) {
        a.next = Head{P3_OPSEEK, 0, 0, 0};
        a.move = +1;
        return a;
      }
      a.move = +1;
      return a;
    case P3_VALGO:
      if (is_sync(cell.kind)) {
        a.next = Head{P3_VALSWEEP, 0, 0, 0};
        a.move = +1;
        return a;
      }
      a.move = -1;
      return a;
    case P3_VALSWEEP:
      // The QST boundary check must come first: the survivor can be the
      // last table entry, leaving the advance flag set on arrival.
      if (cell.kind == QST) {
        a.next = Head{P3_QWRITE, h.carry, 0, 0};
        a.move = 0;
        return a;
      }
      if (cell.kind == T_VAL && cell.mark) {
        a.clear_mark = true;
        a.next = Head{P3_VALSWEEP, cell.digit, 0, 1};  // flag: advance cursor
        a.move = +1;
        return a;
      }
      if (h.flag) {
        if (cell.kind == T_VAL) a.set_mark = true;
        a.next.flag = 0;
        a.next.carry = h.carry;
        a.move = +1;
        return a;
      }
      a.move = +1;
      return a;
    case P3_QWRITE:
      if (cell.kind == QST && !cell.mark) {
        a.write_digit = true;
        a.digit = h.carry;
        a.set_mark = true;
        a.next = Head{P3_QCHECK, 0, 0, 0};
        a.move = +1;
        return a;
      }
      a.move = +1;
      return a;
    case P3_QCHECK:
      if (cell.kind == QST && !cell.mark) {
        a.next = Head{P3_VALGO, 0, 0, 0};
        a.move = -1;
        return a;
      }
      if (cell.kind != QST) {
        a.next = Head{P3_RESTGO, 0, 0, 0};
        a.move = -1;
        return a;
      }
      a.move = +1;
      return a;
    case P3_RESTGO:
      if (is_sync(cell.kind)) {
        a.next = Head{P3_RESTSWEEP, 0, 0, 0};
        a.move = +1;
        return a;
      }
      a.move = -1;
      return a;
    case P3_RESTSWEEP:
      if (is_table(cell.kind)) {
        if (cell.kind == T_KQ && cell.start) a.set_mark = true;
        else a.clear_mark = true;
        a.move = +1;
        return a;
      }
      if (cell.kind == QST) {
        a.clear_mark = true;
        a.move = +1;
        return a;
      }
      if (cell.kind == RSY) {
        a.next = Head{CD_GOSYNC, 0, 1, 0};
        a.move = -1;
        return a;
      }
      a.move = +1;
      return a;
    case CD_GOSYNC:
      if (cell.kind == SY_M3 && cell.start) {
        a.next = Head{CD_COPYSEEK, 0, 1, 0};
        a.move = 0;
        return a;
      }
      a.move = -1;
      return a;

    case P4_SWEEP:
      if (cell.kind == RSY || is_nbq(cell.kind) || is_nbr(cell.kind)) {
        a.write_digit = true;
        a.digit = 0;
        a.clear_mark = true;
        a.move = +1;
        return a;
      }
      if (cell.kind == QST) {
        a.clear_mark = true;
        a.move = +1;
        return a;
      }
      if (cell.kind == SY_M1) {
        a.next = Head{P4_HOME, 0, 0, 0};
        a.move = -1;
        return a;
      }
      a.move = +1;
      return a;
    case P4_HOME:
      if (cell.kind == SY_M1 && cell.start) {
        a.next = Head{P1_GEN, 0, 0, 0};
        a.move = 0;
        return a;
      }
      a.move = -1;
      return a;
    default:
      break;
  }
  throw Error("universal head: unhandled mode");
}

}  // namespace

UniversalFamily universal_pca(const PrimeSet& p) {
  if (p.primes.empty()) throw Error("universal_pca: prime set must be nonempty");
  std::uint64_t d = 1;
  for (std::uint64_t q : p.primes) d = mul_sat(d, q);
  const Codec codec(d);

  FunctionRule rule;
  rule.f = [codec](std::span<const Symbol> cw, std::span<const Symbol> sw) -> Symbol {
    const UCell left = codec.unpack(cw[0]);
    UCell me = codec.unpack(cw[1]);
    const UCell right = codec.unpack(cw[2]);
    const Symbol rnd = sw[0];

    if (me.has_head) {
      const Action a = head_action(me.head, me);
      if (a.write_digit) me.digit = a.write_random ? rnd : a.digit;
      if (a.set_mark) me.mark = true;
      if (a.clear_mark) me.mark = false;
      if (a.move == 0) {
        me.head = a.next;
      } else {
        me.has_head = false;
      }
    }
    // Arrivals. Heads keep pairwise distance m >= 3, so at most one
    // neighbor hands a head over.
    if (left.has_head) {
      const Action a = head_action(left.head, left);
      if (a.move == +1) {
        me.has_head = true;
        me.head = a.next;
      }
    }
    if (right.has_head) {
      const Action a = head_action(right.head, right);
      if (a.move == -1) {
        me.has_head = true;
        me.head = a.next;
      }
    }
    return codec.pack(me);
  };

  // Non-determinism witness: a generating head writes its own random symbol.
  UCell gen_cell;
  gen_cell.kind = RSY;
  gen_cell.has_head = true;
  gen_cell.head = Head{P1_GEN, 0, 0, 0};
  const Symbol center = codec.pack(gen_cell);
  UCell blank;
  blank.kind = QST;
  const Symbol side = codec.pack(blank);
  rule.non_determinism_witness = {{side, center, side}, {0}, {1}};

  UniversalFamily fam;
  fam.u = Sca(Alphabet(codec.alphabet_size()), Alphabet(d), Neighborhood{-1, 0, 1},
              Neighborhood{0}, std::move(rule), "universal");
  fam.primes = p;
  fam.d = d;
  return fam;
}

namespace {

constexpr std::uint64_t kSyncWidth = 12;  // per subfield, binary digits

std::uint64_t ceil_log2(std::uint64_t n) {
  std::uint64_t w = 0, v = 1;
  while (v < n) {
    v *= 2;
    ++w;
  }
  return std::max<std::uint64_t>(w, 1);
}

// Normalized copy of `a`: neighborhoods ascending and nonempty, table
// permuted to match.
Sca normalize_for_encoding(const Sca& a) {
  std::vector<int> vs = a.nbr().offsets;
  std::vector<int> vps = a.rnd_nbr().offsets;
  if (vs.empty()) vs.push_back(0);
  if (vps.empty()) vps.push_back(0);
  std::sort(vs.begin(), vs.end());
  std::sort(vps.begin(), vps.end());
  const auto index_of = [](const std::vector<int>& where, int o) {
    return static_cast<std::size_t>(
        std::distance(where.begin(), std::find(where.begin(), where.end(), o)));
  };
  return make_sca(
      a.states(), a.random(), Neighborhood(vs), Neighborhood(vps),
      [&](const std::vector<Symbol>& qw, const std::vector<Symbol>& sw) -> Symbol {
        std::vector<Symbol> qd(a.r()), sd(a.r_prime());
        for (std::size_t j = 0; j < a.r(); ++j) qd[j] = qw[index_of(vs, a.nbr().offsets[j])];
        for (std::size_t j = 0; j < a.r_prime(); ++j)
          sd[j] = sw[index_of(vps, a.rnd_nbr().offsets[j])];
        return a.apply_rule(qd, sd);
      },
      a.name());
}

struct BlockGeometry {
  std::vector<UCell> cells;                      // canonical content, q = 0
  std::int64_t qstate_at = 0, rsym_at = 0;       // field starts
  std::uint64_t entries = 0, entry_width = 0;
};

std::uint32_t nbq_kind(int offset) {
  return offset < 0 ? NBQ_M1 : (offset == 0 ? NBQ_0 : NBQ_P1);
}
std::uint32_t nbr_kind(int offset) {
  return offset < 0 ? NBR_M1 : (offset == 0 ? NBR_0 : NBR_P1);
}

void write_binary(std::vector<UCell>& cells, std::int64_t at, std::uint64_t width,
                  std::uint64_t value) {
  for (std::uint64_t i = 0; i < width; ++i) {
    // MSB first; LSB sits at the right end.
    cells[static_cast<std::size_t>(at + static_cast<std::int64_t>(i))].digit =
        static_cast<std::uint32_t>((value >> (width - 1 - i)) & 1);
  }
}

BlockGeometry block_geometry(const UniversalLayout& lay) {
  BlockGeometry g;
  const auto push_field = [&](std::uint32_t kind, std::uint64_t width) {
    for (std::uint64_t i = 0; i < width; ++i) {
      UCell c;
      c.kind = kind;
      c.start = (i == 0);
      g.cells.push_back(c);
    }
  };
  push_field(SY_M1, kSyncWidth);
  push_field(SY_W1, kSyncWidth);
  push_field(SY_M3, kSyncWidth);
  push_field(SY_W3, kSyncWidth);
  write_binary(g.cells, 0, kSyncWidth, lay.c1);
  write_binary(g.cells, 2 * kSyncWidth, kSyncWidth, lay.c3);

  const Sca& a = lay.normalized;
  const std::uint64_t nq = a.states().size();
  const std::uint64_t raw_space = pow_sat(lay.d, lay.w);
  g.entries = mul_sat(pow_sat(nq, a.r()), pow_sat(raw_space, a.r_prime()));
  g.entry_width = a.r() * lay.qw + a.r_prime() * lay.w + lay.qw;
  for (std::uint64_t e = 0; e < g.entries; ++e) {
    // Key: state digits then raw digits, matching the operand scan order.
    const std::uint64_t qpart = e / pow_sat(raw_space, a.r_prime());
    const std::uint64_t rpart = e % pow_sat(raw_space, a.r_prime());
    const auto qword = word_of_rank(qpart, nq, static_cast<std::int64_t>(a.r()));
    const auto rword = word_of_rank(rpart, raw_space, static_cast<std::int64_t>(a.r_prime()));
    const std::int64_t base = static_cast<std::int64_t>(g.cells.size());
    for (std::size_t j = 0; j < a.r(); ++j) push_field(T_KQ, lay.qw);
    for (std::size_t j = 0; j < a.r_prime(); ++j) push_field(T_KR, lay.w);
    push_field(T_VAL, lay.qw);
    // Entry start flag and initial cursor only on the very first key cell.
    for (std::int64_t i = base; i < static_cast<std::int64_t>(g.cells.size()); ++i)
      g.cells[static_cast<std::size_t>(i)].start = false;
    g.cells[static_cast<std::size_t>(base)].start = true;
    g.cells[static_cast<std::size_t>(base)].mark = true;

    std::int64_t at = base;
    for (std::size_t j = 0; j < a.r(); ++j, at += lay.qw)
      write_binary(g.cells, at, lay.qw, qword[j]);
    for (std::size_t j = 0; j < a.r_prime(); ++j, at += lay.w) {
      // Raw digits in base D.
      for (std::uint64_t i = 0; i < lay.w; ++i) {
        std::uint64_t v = rword[j];
        for (std::uint64_t k = 1; k + i < lay.w; ++k) v /= lay.d;
        g.cells[static_cast<std::size_t>(at + static_cast<std::int64_t>(i))].digit =
            static_cast<std::uint32_t>(v % lay.d);
      }
    }
    std::vector<Symbol> sym(a.r_prime());
    for (std::size_t j = 0; j < a.r_prime(); ++j) {
      const auto raw = word_of_rank(rword[j], lay.d, static_cast<std::int64_t>(lay.w));
      sym[j] = lay.gen.apply(raw);
    }
    write_binary(g.cells, at, lay.qw, a.apply_rule(qword, sym));
  }

  g.qstate_at = static_cast<std::int64_t>(g.cells.size());
  push_field(QST, lay.qw);
  g.rsym_at = static_cast<std::int64_t>(g.cells.size());
  push_field(RSY, lay.w);
  for (int v : lay.v) push_field(nbq_kind(v), lay.qw);
  for (int v : lay.v_prime) push_field(nbr_kind(v), lay.w);
  return g;
}

std::vector<Symbol> pack_block(const Codec& codec, const BlockGeometry& g, std::uint64_t qw,
                               Symbol q, bool with_head) {
  std::vector<UCell> cells = g.cells;
  write_binary(cells, g.qstate_at, qw, q);
  if (with_head) {
    cells[0].has_head = true;
    cells[0].head = Head{P1_GEN, 0, 0, 0};
  }
  std::vector<Symbol> out;
  out.reserve(cells.size());
  for (const UCell& c : cells) out.push_back(codec.pack(c));
  return out;
}

}  // namespace

std::vector<Symbol> canonical_block(const UniversalFamily& u, const UniversalLayout& layout,
                                    Symbol q) {
  const Codec codec(u.d);
  const BlockGeometry g = block_geometry(layout);
  return pack_block(codec, g, layout.qw, q, true);
}

std::vector<Symbol> encode_config(const UniversalFamily& u, const UniversalLayout& layout,
                                  const std::vector<Symbol>& states) {
  std::vector<Symbol> out;
  out.reserve(states.size() * layout.m);
  const Codec codec(u.d);
  const BlockGeometry g = block_geometry(layout);
  for (Symbol q : states) {
    const auto block = pack_block(codec, g, layout.qw, q, true);
    out.insert(out.end(), block.begin(), block.end());
  }
  return out;
}

std::vector<Symbol> decode_config(const UniversalFamily& u, const UniversalLayout& layout,
                                  const std::vector<Symbol>& cells) {
  if (cells.size() % layout.m != 0)
    throw SchemaError("decode_config: length is not a multiple of the block width");
  const Codec codec(u.d);
  const BlockGeometry g = block_geometry(layout);
  std::vector<Symbol> out;
  for (std::size_t b = 0; b * layout.m < cells.size(); ++b) {
    std::uint64_t q = 0;
    for (std::uint64_t i = 0; i < layout.qw; ++i) {
      const UCell c = codec.unpack(
          cells[b * layout.m + static_cast<std::uint64_t>(g.qstate_at) + i]);
      if (c.kind != QST) throw SchemaError("decode_config: misaligned block");
      q = q * 2 + c.digit;
    }
    if (q >= layout.normalized.states().size())
      throw SchemaError("decode_config: state digits out of range");
    const auto expect = pack_block(codec, g, layout.qw, static_cast<Symbol>(q), true);
    for (std::uint64_t i = 0; i < layout.m; ++i)
      if (cells[b * layout.m + i] != expect[i])
        throw SchemaError("decode_config: block " + std::to_string(b) + " is not canonical");
    out.push_back(static_cast<Symbol>(q));
  }
  return out;
}

namespace {

// Runs one machine cycle on a ring of `blocks` canonical blocks, feeding the
// prescribed raw digits at the generation schedule (all other random cells
// 0). Checks the head discipline each step. Returns the final row.
//
// Headless cells with headless neighbors are fixed points of the rule, so
// only the three cells around each head are recomputed per step; head
// positions are tracked incrementally and re-checked from the updates.
std::vector<Symbol> run_cycle(const UniversalFamily& u, const UniversalLayout& lay,
                              const std::vector<Symbol>& qs,
                              const std::vector<std::vector<Symbol>>& raws,
                              const std::vector<std::pair<std::uint64_t, std::int64_t>>* schedule,
                              std::vector<std::pair<std::uint64_t, std::int64_t>>* record) {
  const Codec codec(u.d);
  const BlockGeometry geo = block_geometry(lay);
  const std::uint64_t blocks = qs.size();
  const std::int64_t period = static_cast<std::int64_t>(blocks * lay.m);
  const std::uint64_t head_span = 1 + codec.head_codes;

  std::vector<Symbol> row;
  for (Symbol q : qs) {
    const auto b = pack_block(codec, geo, lay.qw, q, true);
    row.insert(row.end(), b.begin(), b.end());
  }

  const auto wrap = [period](std::int64_t x) {
    std::int64_t m = x % period;
    if (m < 0) m += period;
    return m;
  };

  std::vector<std::int64_t> heads;
  for (std::int64_t z = 0; z < period; ++z)
    if (row[static_cast<std::size_t>(z)] % head_span != 0) heads.push_back(z);

  std::vector<Symbol> qbuf(3), sbuf(1);
  std::vector<std::pair<std::int64_t, Symbol>> updates;
  const std::uint64_t steps = lay.t_u == 0 ? UINT64_MAX : lay.t_u;
  for (std::uint64_t step = 0; step < steps; ++step) {
    if (heads.size() != blocks) throw Error("universal machine: head count diverged");
    for (std::size_t i = 1; i < heads.size(); ++i)
      if (heads[i] - heads[i - 1] != static_cast<std::int64_t>(lay.m))
        throw Error("universal machine: heads lost lockstep");

    if (record) {
      const UCell hc = codec.unpack(row[static_cast<std::size_t>(heads[0])]);
      if (hc.head.mode == P1_GEN && hc.kind == RSY && heads[0] < static_cast<std::int64_t>(lay.m))
        record->push_back({step, heads[0]});
    }

    const auto random_at = [&](std::int64_t z) -> Symbol {
      if (!schedule) return 0;
      const std::int64_t in_block = z % static_cast<std::int64_t>(lay.m);
      const std::uint64_t b = static_cast<std::uint64_t>(z) / lay.m;
      for (const auto& [at, cell] : *schedule)
        if (at == step && cell == in_block)
          return raws[b][static_cast<std::size_t>(cell - lay.rsym.start)];
      return 0;
    };

    updates.clear();
    for (const std::int64_t h : heads) {
      for (std::int64_t d = -1; d <= 1; ++d) {
        const std::int64_t z = wrap(h + d);
        qbuf[0] = row[static_cast<std::size_t>(wrap(z - 1))];
        qbuf[1] = row[static_cast<std::size_t>(z)];
        qbuf[2] = row[static_cast<std::size_t>(wrap(z + 1))];
        sbuf[0] = random_at(z);
        updates.push_back({z, u.u.apply_rule(qbuf, sbuf)});
      }
    }
    std::vector<std::int64_t> new_heads;
    for (const auto& [z, s] : updates) {
      row[static_cast<std::size_t>(z)] = s;
      if (s % head_span != 0) new_heads.push_back(z);
    }
    std::sort(new_heads.begin(), new_heads.end());
    heads = std::move(new_heads);

    if (lay.t_u == 0) {
      // Timing dry run: stop when every head is back home in P1_GEN.
      bool done = step > 0 && heads.size() == blocks;
      for (std::uint64_t b = 0; b < blocks && done; ++b) {
        const UCell c = codec.unpack(row[static_cast<std::size_t>(b * lay.m)]);
        done = c.has_head && c.head.mode == P1_GEN;
      }
      if (done) {
        if (record) record->push_back({step + 1, -1});  // cycle length marker
        return row;
      }
      if (step > 200 * lay.m * std::max<std::uint64_t>(geo.entries, 4) + 100000)
        throw Error("universal machine: cycle did not close");
    }
  }
  return row;
}

}  // namespace

UniversalEncoding encode_into_universal(const Sca& a, const UniversalFamily& u) {
  if (radius(a) > 1)
    throw Error("encode_into_universal: radius > 1; pack the automaton down first");
  UniversalLayout lay;
  lay.normalized = normalize_for_encoding(a);
  lay.d = u.d;
  lay.qw = ceil_log2(a.states().size());
  lay.gen = rand_symbol_map(a.random().size(), u.d);
  lay.w = lay.gen.width;
  lay.v = lay.normalized.nbr().offsets;
  lay.v_prime = lay.normalized.rnd_nbr().offsets;
  lay.base = 2;

  const Sca& na = lay.normalized;
  const std::uint64_t raw_space = pow_sat(lay.d, lay.w);
  const std::uint64_t entries =
      mul_sat(pow_sat(na.states().size(), na.r()), pow_sat(raw_space, na.r_prime()));
  const std::uint64_t entry_width = na.r() * lay.qw + na.r_prime() * lay.w + lay.qw;
  check_budget(mul_sat(entries, entry_width), "universal table");

  lay.m = 4 * kSyncWidth + entries * entry_width + lay.qw + lay.w + na.r() * lay.qw +
          na.r_prime() * lay.w;
  lay.sync = {0, static_cast<std::int64_t>(4 * kSyncWidth)};
  lay.table = {lay.sync.width, static_cast<std::int64_t>(entries * entry_width)};
  lay.qstate = {lay.table.start + lay.table.width, static_cast<std::int64_t>(lay.qw)};
  lay.rsym = {lay.qstate.start + lay.qstate.width, static_cast<std::int64_t>(lay.w)};
  lay.nbr_q = {lay.rsym.start + lay.rsym.width,
               static_cast<std::int64_t>(na.r() * lay.qw)};
  lay.nbr_r = {lay.nbr_q.start + lay.nbr_q.width,
               static_cast<std::int64_t>(na.r_prime() * lay.w)};
  lay.c1 = (lay.m + kSyncWidth - 1) / kSyncWidth;
  lay.c3 = lay.c1;

  // Dry run for the cycle length and the generation schedule.
  lay.t_u = 0;
  std::vector<std::pair<std::uint64_t, std::int64_t>> record;
  run_cycle(u, lay, std::vector<Symbol>(3, 0),
            std::vector<std::vector<Symbol>>(3, std::vector<Symbol>(lay.w, 0)), nullptr, &record);
  if (record.empty() || record.back().second != -1)
    throw Error("universal machine: timing run failed");
  lay.t_u = record.back().first;
  record.pop_back();
  if (record.size() != lay.w) throw Error("universal machine: generation schedule mismatch");
  lay.gen_schedule = record;

  UniversalEncoding enc;
  // Injection: each state to the packed rank of its canonical clean block.
  const Codec codec(u.d);
  const BlockGeometry geo = block_geometry(lay);
  const BigInt qu(codec.alphabet_size());
  std::vector<BigInt> images;
  for (std::uint64_t q = 0; q < na.states().size(); ++q) {
    const auto block = pack_block(codec, geo, lay.qw, static_cast<Symbol>(q), true);
    BigInt rank = 0;
    for (Symbol s : block) rank = rank * qu + s;
    images.push_back(std::move(rank));
  }
  BigInt codomain = 1;
  for (std::uint64_t i = 0; i < lay.m; ++i) codomain *= qu;
  enc.injection = TrimMap::restriction(std::move(images), std::move(codomain));

  enc.witness.left = RescaleParams{1, 1, 0};
  enc.witness.right = RescaleParams{lay.m, lay.t_u, 0};
  enc.witness.trims = {enc.injection};
  enc.witness.verified_bound = 2;
  enc.witness.flavor =
      SimFlavor{lay.gen.uniform ? GlobalKind::Stochastic : GlobalKind::NonDeterministic,
                TrimFlavor::Injection};
  enc.layout = std::move(lay);
  return enc;
}

Sca extract_block_automaton(const UniversalFamily& u, const UniversalLayout& layout,
                            ExecMode mode) {
  const Sca& na = layout.normalized;
  const std::uint64_t nq = na.states().size();
  const std::uint64_t raw_space = pow_sat(layout.d, layout.w);
  const std::uint64_t n_states = nq * nq * nq;
  const std::uint64_t n_raws = raw_space * raw_space * raw_space;
  // Each ring run is one atomic enumeration; the run count is a sweep.
  check_budget(mul_sat(n_states, n_raws), "universal block-map run count");
  check_budget(mul_sat(3 * layout.m, layout.t_u), "universal block-map run");

  const Codec codec(u.d);
  const BlockGeometry geo = block_geometry(layout);

  // Every ring run must end in the canonical encoding of the table-lookup
  // update of all three blocks; that exhausts the block map at radius one.
  const std::uint64_t total = n_states * n_raws;
  std::vector<std::string> errors;

  const auto run_one = [&](std::uint64_t idx) -> std::string {
    const std::uint64_t qrank = idx / n_raws;
    const std::uint64_t rrank = idx % n_raws;
    const auto qs = word_of_rank(qrank, nq, 3);
    const auto raw_ranks = word_of_rank(rrank, raw_space, 3);
    std::vector<std::vector<Symbol>> raws(3);
    for (int b = 0; b < 3; ++b)
      raws[b] = word_of_rank(raw_ranks[b], layout.d, static_cast<std::int64_t>(layout.w));

    std::vector<Symbol> final_row;
    try {
      final_row = run_cycle(u, layout, qs, raws, &layout.gen_schedule, nullptr);
    } catch (const Error& e) {
      return e.what();
    }

    // Expected: blocks canonical with the looked-up states.
    std::vector<Symbol> expect_q(3);
    for (int b = 0; b < 3; ++b) {
      std::vector<Symbol> qword(na.r()), sword(na.r_prime());
      for (std::size_t j = 0; j < na.r(); ++j)
        qword[j] = qs[static_cast<std::size_t>(((b + layout.v[j]) % 3 + 3) % 3)];
      for (std::size_t j = 0; j < na.r_prime(); ++j)
        sword[j] =
            layout.gen.apply(raws[static_cast<std::size_t>(((b + layout.v_prime[j]) % 3 + 3) % 3)]);
      expect_q[static_cast<std::size_t>(b)] = na.apply_rule(qword, sword);
    }
    for (int b = 0; b < 3; ++b) {
      const auto want =
          pack_block(codec, geo, layout.qw, expect_q[static_cast<std::size_t>(b)], true);
      for (std::uint64_t i = 0; i < layout.m; ++i) {
        if (final_row[static_cast<std::size_t>(b) * layout.m + i] != want[i])
          return "block " + std::to_string(b) + " cell " + std::to_string(i) +
                 " not canonical after one cycle (triple " + std::to_string(idx) + ")";
      }
    }
    return {};
  };

#ifdef SCA_HAVE_OPENMP
  if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(total); ++i) {
      const std::string err = run_one(static_cast<std::uint64_t>(i));
      if (!err.empty()) {
#pragma omp critical
        errors.push_back(err);
      }
    }
  } else
#endif
  {
    for (std::uint64_t i = 0; i < total; ++i) {
      const std::string err = run_one(i);
      if (!err.empty()) errors.push_back(err);
    }
  }
  if (!errors.empty()) {
    std::sort(errors.begin(), errors.end());
    throw Error("universal machine verification failed: " + errors.front());
  }

  // The ring runs confirmed the machine computes the table lookup of the
  // (V, V')-windows; build that automaton over the raw alphabet.
  std::vector<Symbol> table;
  const std::uint64_t nq_words = pow_sat(nq, na.r());
  const std::uint64_t ns_words = pow_sat(raw_space, na.r_prime());
  table.reserve(nq_words * ns_words);
  for (std::uint64_t qi = 0; qi < nq_words; ++qi) {
    const auto qword = word_of_rank(qi, nq, static_cast<std::int64_t>(na.r()));
    for (std::uint64_t si = 0; si < ns_words; ++si) {
      const auto sranks = word_of_rank(si, raw_space, static_cast<std::int64_t>(na.r_prime()));
      std::vector<Symbol> sword(na.r_prime());
      for (std::size_t j = 0; j < na.r_prime(); ++j) {
        const auto raw =
            word_of_rank(sranks[j], layout.d, static_cast<std::int64_t>(layout.w));
        sword[j] = layout.gen.apply(raw);
      }
      table.push_back(na.apply_rule(qword, sword));
    }
  }
  return Sca(na.states(), Alphabet(raw_space), na.nbr(), na.rnd_nbr(), std::move(table),
             "decoded(" + na.name() + ")");
}

bool verify_universal_witness(const UniversalFamily& u, const UniversalEncoding& enc,
                              GlobalKind kind, std::int64_t max_window, ExecMode mode) {
  const Sca decoded = extract_block_automaton(u, enc.layout, mode);
  const Sca& na = enc.layout.normalized;
  switch (kind) {
    case GlobalKind::NonDeterministic:
      return nondet_equal(na, decoded, max_window, mode).equal();
    case GlobalKind::Stochastic:
      return one_step_equal(na, decoded, max_window, mode).equal();
    case GlobalKind::Deterministic:
      return deterministic_equal(na, decoded, max_window, mode).equal();
  }
  return false;
}

}  // namespace sca
