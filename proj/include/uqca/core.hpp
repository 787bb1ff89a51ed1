#pragma once
// Tapes, sparse superpositions of tapes, and the partitioned evolution engine.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace uqca {

using cplx = std::complex<double>;
using Cell = std::uint16_t;

struct Alphabet {
  std::string name;
  std::vector<int> sizes;  // most significant subsystem first

  int dim() const {
    int d = 1;
    for (int s : sizes) d *= s;
    return d;
  }
  int arity() const { return (int)sizes.size(); }

  Cell pack(const std::vector<int>& digits) const {
    if ((int)digits.size() != arity()) throw std::invalid_argument("wrong digit count for alphabet " + name);
    int v = 0;
    for (int i = 0; i < arity(); ++i) {
      if (digits[i] < 0 || digits[i] >= sizes[i])
        throw std::out_of_range("digit " + std::to_string(digits[i]) + " out of range in subsystem " +
                                std::to_string(i) + " of " + name);
      v = v * sizes[i] + digits[i];
    }
    return (Cell)v;
  }
  std::vector<int> unpack(Cell c) const {
    std::vector<int> d(arity());
    int v = c;
    for (int i = arity() - 1; i >= 0; --i) {
      d[i] = v % sizes[i];
      v /= sizes[i];
    }
    return d;
  }
  int digit(Cell c, int sub) const {
    int v = c;
    for (int i = arity() - 1; i > sub; --i) v /= sizes[i];
    return v % sizes[sub];
  }
  bool operator==(const Alphabet& o) const { return name == o.name && sizes == o.sizes; }
};

inline const Alphabet& weak_alphabet() {
  static const Alphabet a{"weak", {3, 4, 3}};
  return a;
}
inline const Alphabet& strong_alphabet() {
  static const Alphabet a{"strong", {3, 3, 3, 4, 4, 4, 3, 3}};
  return a;
}
// one qubit per cell plus the quiescent symbol: 0 = q, 1 = |0>, 2 = |1>
inline const Alphabet& sim_alphabet() {
  static const Alphabet a{"sim", {3}};
  return a;
}
inline const Alphabet& alphabet_by_name(const std::string& n) {
  if (n == "weak") return weak_alphabet();
  if (n == "strong") return strong_alphabet();
  if (n == "sim") return sim_alphabet();
  throw std::invalid_argument("unknown alphabet " + n);
}

struct Config {
  std::int64_t offset = 0;
  std::vector<Cell> cells;

  Cell at(std::int64_t i) const {
    std::int64_t k = i - offset;
    return (k < 0 || k >= (std::int64_t)cells.size()) ? Cell(0) : cells[k];
  }
  std::int64_t end() const { return offset + (std::int64_t)cells.size(); }
  auto operator<=>(const Config&) const = default;
};

// Trim quiescent tails. An all-quiescent word becomes the empty configuration at offset 0.
inline Config canonicalize(std::int64_t offset, std::vector<Cell> cells) {
  std::size_t a = 0, b = cells.size();
  while (a < b && cells[a] == 0) ++a;
  while (b > a && cells[b - 1] == 0) --b;
  if (a == b) return {};
  Config c;
  c.offset = offset + (std::int64_t)a;
  c.cells.assign(cells.begin() + a, cells.begin() + b);
  return c;
}

inline Config canonicalize_checked(const Alphabet& al, std::int64_t offset,
                                   const std::vector<std::vector<int>>& digits) {
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    try {
      cells.push_back(al.pack(digits[i]));
    } catch (const std::exception& e) {
      throw std::out_of_range("invalid cell at position " + std::to_string(offset + (std::int64_t)i) + ": " +
                              e.what());
    }
  }
  return canonicalize(offset, std::move(cells));
}

inline double default_prune() {
  static const double v = [] {
    const char* e = std::getenv("UQCA_PRUNE");
    return e ? std::strtod(e, nullptr) : 1e-14;
  }();
  return v;
}

// A superposition of configurations. Ring states keep a fixed cyclic word at offset 0.
struct SparseState {
  const Alphabet* alpha = &weak_alphabet();
  std::map<Config, cplx> terms;
  bool ring = false;

  static SparseState basis(const Alphabet& a, Config c, bool ring = false) {
    SparseState s;
    s.alpha = &a;
    s.ring = ring;
    s.terms[std::move(c)] = 1.0;
    return s;
  }
  double norm2() const {
    double n = 0;
    for (auto& [c, a] : terms) n += std::norm(a);
    return n;
  }
  void add(const Config& c, cplx a) {
    auto [it, fresh] = terms.emplace(c, a);
    if (!fresh) it->second += a;
  }
  void prune(double eps) {
    for (auto it = terms.begin(); it != terms.end();)
      it = std::abs(it->second) < eps ? terms.erase(it) : std::next(it);
  }
  void normalize() {
    double n = std::sqrt(norm2());
    if (n == 0) throw std::runtime_error("cannot normalize the zero state");
    for (auto& [c, a] : terms) a /= n;
  }
};

struct PairOut {
  Cell x, y;
  cplx amp;
};

// Scattering unitary acting on one pair of neighbouring cells.
class PairRule {
 public:
  virtual ~PairRule() = default;
  virtual const Alphabet& alphabet() const = 0;
  // Appends the image of |x y> to out.
  virtual void apply(Cell x, Cell y, std::vector<PairOut>& out) const = 0;
};

inline void check_alpha(const SparseState& s, const PairRule& u) {
  if (!(*s.alpha == u.alphabet()))
    throw std::invalid_argument("alphabet mismatch: state " + s.alpha->name + ", rule " + u.alphabet().name);
}

namespace detail {
struct Partial {
  std::vector<Cell> cells;
  cplx amp;
};

// Applies u to pairs starting at word index first, first+2, ... ; wrap pairs the last cell with the first.
inline void apply_pairs(const PairRule& u, std::vector<Cell> word, cplx amp, std::size_t first, bool wrap,
                        std::vector<Partial>& out) {
  std::vector<Partial> cur{{std::move(word), amp}};
  std::vector<PairOut> res;
  const std::size_t n = cur[0].cells.size();
  const std::size_t npairs = wrap ? n / 2 : (n - first) / 2;
  for (std::size_t k = 0; k < npairs; ++k) {
    std::size_t a = (first + 2 * k) % n, b = (first + 2 * k + 1) % n;
    std::vector<Partial> next;
    next.reserve(cur.size());
    for (auto& p : cur) {
      res.clear();
      u.apply(p.cells[a], p.cells[b], res);
      if (res.size() == 1) {
        p.cells[a] = res[0].x;
        p.cells[b] = res[0].y;
        p.amp *= res[0].amp;
        next.push_back(std::move(p));
      } else {
        for (std::size_t j = 0; j < res.size(); ++j) {
          Partial q{j + 1 == res.size() ? std::move(p.cells) : p.cells, p.amp * res[j].amp};
          q.cells[a] = res[j].x;
          q.cells[b] = res[j].y;
          next.push_back(std::move(q));
        }
      }
    }
    cur.swap(next);
  }
  for (auto& p : cur) out.push_back(std::move(p));
}
}  // namespace detail

// One engine step: pairs (2i+parity, 2i+parity+1) in absolute coordinates.
inline SparseState step(const SparseState& in, int parity, const PairRule& u, double prune = default_prune()) {
  check_alpha(in, u);
  SparseState out;
  out.alpha = in.alpha;
  out.ring = in.ring;
  std::vector<detail::Partial> parts;
  for (auto& [c, amp] : in.terms) {
    parts.clear();
    if (in.ring) {
      if (c.cells.size() % 2) throw std::invalid_argument("ring length must be even");
      detail::apply_pairs(u, c.cells, amp, (std::size_t)(parity & 1), true, parts);
      for (auto& p : parts) out.add(Config{0, std::move(p.cells)}, p.amp);
      continue;
    }
    if (c.cells.empty()) {
      out.add(c, amp);
      continue;
    }
    std::int64_t lo = c.offset, hi = c.end();
    if (((lo - parity) % 2 + 2) % 2) --lo;
    if (((hi - parity) % 2 + 2) % 2) ++hi;
    std::vector<Cell> w((std::size_t)(hi - lo), 0);
    std::copy(c.cells.begin(), c.cells.end(), w.begin() + (c.offset - lo));
    detail::apply_pairs(u, std::move(w), amp, 0, false, parts);
    for (auto& p : parts) out.add(canonicalize(lo, std::move(p.cells)), p.amp);
  }
  out.prune(prune);
  return out;
}

// Classical fast path for basis tapes. Returns false if the rule produced a superposition.
inline bool step_basis(Config& c, int parity, const PairRule& u) {
  if (c.cells.empty()) return true;
  std::int64_t lo = c.offset, hi = c.end();
  if (((lo - parity) % 2 + 2) % 2) --lo;
  if (((hi - parity) % 2 + 2) % 2) ++hi;
  std::vector<Cell> w((std::size_t)(hi - lo), 0);
  std::copy(c.cells.begin(), c.cells.end(), w.begin() + (c.offset - lo));
  std::vector<PairOut> res;
  for (std::size_t i = 0; i + 1 < w.size(); i += 2) {
    res.clear();
    u.apply(w[i], w[i + 1], res);
    if (res.size() != 1) return false;
    w[i] = res[0].x;
    w[i + 1] = res[0].y;
  }
  c = canonicalize(lo, std::move(w));
  return true;
}

struct Trajectory {
  std::vector<SparseState> snaps;  // snaps[k] is the state after k steps
  int first_parity = 0;
};

inline SparseState evolve(SparseState s, long steps, const PairRule& u, int first_parity = 0,
                          Trajectory* record = nullptr, double prune = default_prune()) {
  if (record) {
    record->first_parity = first_parity;
    record->snaps.push_back(s);
  }
  for (long k = 0; k < steps; ++k) {
    s = step(s, (int)((first_parity + k) & 1), u, prune);
    if (record) record->snaps.push_back(s);
  }
  return s;
}

inline SparseState shift(const SparseState& s, std::int64_t k) {
  SparseState o;
  o.alpha = s.alpha;
  o.ring = s.ring;
  for (auto& [c, a] : s.terms) {
    if (s.ring) {
      Config r = c;
      std::int64_t n = (std::int64_t)c.cells.size();
      for (std::int64_t i = 0; i < n; ++i) r.cells[(std::size_t)(((i + k) % n + n) % n)] = c.cells[(std::size_t)i];
      o.add(r, a);
    } else if (c.cells.empty()) {
      o.add(c, a);
    } else {
      o.add(Config{c.offset + k, c.cells}, a);
    }
  }
  return o;
}

inline cplx inner_product(const SparseState& a, const SparseState& b) {
  if (!(*a.alpha == *b.alpha)) throw std::invalid_argument("alphabet mismatch in inner product");
  cplx r = 0;
  const auto& small = a.terms.size() <= b.terms.size() ? a.terms : b.terms;
  const auto& big = a.terms.size() <= b.terms.size() ? b.terms : a.terms;
  bool a_small = &small == &a.terms;
  for (auto& [c, x] : small) {
    auto it = big.find(c);
    if (it == big.end()) continue;
    r += a_small ? std::conj(x) * it->second : std::conj(it->second) * x;
  }
  return r;
}

inline double fidelity(const SparseState& a, const SparseState& b) { return std::norm(inner_product(a, b)); }

struct SuperBlock {
  std::int64_t start;
  std::vector<Cell> cells;
  bool quiescent;
};

// Regroups cells into blocks of s anchored at anchor, covering the stored word.
inline std::vector<SuperBlock> group_view(const Config& c, int s, std::int64_t anchor) {
  if (s < 1) throw std::invalid_argument("block size must be positive");
  std::vector<SuperBlock> out;
  if (c.cells.empty()) return out;
  auto fl = [&](std::int64_t x) { return anchor + ((x - anchor) >= 0 ? (x - anchor) / s : -((anchor - x + s - 1) / s)) * s; };
  for (std::int64_t b = fl(c.offset); b < c.end(); b += s) {
    SuperBlock blk{b, {}, true};
    for (std::int64_t i = b; i < b + s; ++i) {
      blk.cells.push_back(c.at(i));
      if (c.at(i)) blk.quiescent = false;
    }
    out.push_back(std::move(blk));
  }
  return out;
}

}  // namespace uqca
