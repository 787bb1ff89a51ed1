#pragma once
// Circuit descriptions and their compilation into weak-machine tapes.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "gates.hpp"
#include "weak.hpp"

namespace uqca {

struct PlacedGate {
  Gate gate;
  int pos;  // relative to the centre pair of the 2n-qubit block
  bool operator==(const PlacedGate&) const = default;
};

// Circuit on 2n qubits; gate at position p acts on qubits (n-1+p, n+p).
struct Circuit {
  int n = 1;
  std::vector<PlacedGate> gates;

  int m() const { return (int)gates.size(); }
  int qubits() const { return 2 * n; }
  void validate() const {
    if (n < 1) throw std::invalid_argument("circuit half-width must be at least 1");
    for (auto& g : gates)
      if (g.pos < -(n - 1) || g.pos > n - 1)
        throw std::out_of_range("gate position " + std::to_string(g.pos) + " out of range for width " +
                                std::to_string(2 * n));
  }
};

// The 2^{2n} matrix of the circuit; qubit 0 is the most significant bit of the index.
inline Mat circuit_matrix(const Circuit& c) {
  c.validate();
  const int q = c.qubits(), dim = 1 << q;
  Mat v = Mat::identity(dim);
  for (auto& pg : c.gates) {
    Mat g = native_gate(pg.gate);
    int a = c.n - 1 + pg.pos;  // left qubit
    int sa = q - 1 - a, sb = q - 2 - a;
    Mat full(dim);
    for (int col = 0; col < dim; ++col) {
      int ba = (col >> sa) & 1, bb = (col >> sb) & 1;
      int rest = col & ~((1 << sa) | (1 << sb));
      for (int oa = 0; oa < 2; ++oa)
        for (int ob = 0; ob < 2; ++ob) {
          cplx e = g(2 * oa + ob, 2 * ba + bb);
          if (e != 0.0) full(rest | (oa << sa) | (ob << sb), col) += e;
        }
    }
    v = full * v;
  }
  return v;
}

struct Factors {
  int s, t;
};

inline Factors expansion_factors(const Circuit& c) {
  int s = 4 * c.n * c.m() + 2 + 2 * c.n;
  return {s, 3 * s / 2};
}

namespace weak {

inline WeakCell filler() { return {0, 0, 1}; }
inline WeakCell change_colour() { return {0, 1, 1}; }

inline std::pair<std::vector<WeakCell>, std::vector<WeakCell>> gate_halves(Gate g, int p, int n) {
  if (p < -(n - 1) || p > n - 1) throw std::out_of_range("gate position out of range");
  WeakCell lc{0, left_code(g), 1}, rc{0, right_code(g), 1};
  std::vector<WeakCell> l, r;
  if (p <= 0) {
    l.assign((std::size_t)(2 * n - 1 + p), filler());
    l.push_back(lc);
    l.insert(l.end(), (std::size_t)-p, filler());
    r.push_back(rc);
    r.insert(r.end(), (std::size_t)(2 * n - 1), filler());
  } else {
    l.assign((std::size_t)(2 * n - 1), filler());
    l.push_back(lc);
    r.assign((std::size_t)p, filler());
    r.push_back(rc);
    r.insert(r.end(), (std::size_t)(2 * n - 1 - p), filler());
  }
  return {l, r};
}

// One supercell with an empty data zone: separator, interleaved descriptors, separator, 2n data cells.
inline std::vector<WeakCell> supercell(const Circuit& c) {
  c.validate();
  std::vector<WeakCell> L, R;
  for (auto& pg : c.gates) {
    auto [l, r] = gate_halves(pg.gate, pg.pos, c.n);
    L.insert(L.begin(), l.begin(), l.end());
    R.insert(R.end(), r.begin(), r.end());
  }
  std::vector<WeakCell> sc{change_colour()};
  for (std::size_t i = 0; i < L.size(); ++i) {
    sc.push_back(L[i]);
    sc.push_back(R[i]);
  }
  sc.push_back(change_colour());
  sc.insert(sc.end(), (std::size_t)(2 * c.n), WeakCell{});
  return sc;
}

}  // namespace weak

// Where things sit on a weak tape. Supercell j starts at absolute cell origin + j*s.
struct WeakLayout {
  Circuit circuit;
  int s = 0, t = 0;
  bool ring = false;
  std::int64_t origin = 1;  // odd, so descriptors line up with the parity-0 pairing
  int first = 0;            // index of the first supercell (negative when padded)
  int count = 0;            // number of supercells on the tape
  int valid_first = 0, valid_count = 0;  // supercells holding the encoded input
  long horizon = 0;
  std::int64_t ring_length() const { return (std::int64_t)count * s; }
  std::int64_t data_start(int j) const { return origin + (std::int64_t)j * s + (s - 2 * circuit.n); }
};

// A simulated state is a superposition of words over the sim alphabet; qubit i of the word is
// logical qubit offset+i (the ring flag marks a cyclic register).
inline SparseState sim_basis(const std::vector<int>& bits, bool ring = false) {
  std::vector<Cell> w;
  for (int b : bits) w.push_back((Cell)(b + 1));
  Config c{0, w};
  return SparseState::basis(sim_alphabet(), ring ? c : canonicalize(0, w), ring);
}

inline SparseState sim_from_bitstring(const std::string& s, bool ring = false) {
  std::vector<int> bits;
  for (char ch : s) {
    if (ch != '0' && ch != '1') throw std::invalid_argument("bitstring may only contain 0 and 1");
    bits.push_back(ch - '0');
  }
  return sim_basis(bits, ring);
}

namespace detail {
inline int qubit_count(const SparseState& sim) {
  int n = -1;
  for (auto& [c, a] : sim.terms) {
    if (n >= 0 && n != (int)c.cells.size()) throw std::invalid_argument("simulated terms of unequal length");
    n = (int)c.cells.size();
    if (c.offset != 0) throw std::invalid_argument("simulated state must start at qubit 0");
    for (Cell v : c.cells)
      if (v == 0) throw std::invalid_argument("simulated input may not contain quiescent cells");
  }
  return n;
}
}  // namespace detail

// Encodes a 2n*x-qubit register as x supercells. Ring tapes are cyclic; padded tapes add
// supercells of encoded |0> data on both sides so that edge effects stay clear of the window
// for `horizon` steps. With empty_padding the padding data zones are left empty instead, which
// is what a strong tape's woven background looks like.
inline std::pair<SparseState, WeakLayout> encode_weak(const Circuit& c, const SparseState& sim, bool ring,
                                                      long horizon = 0, bool empty_padding = false) {
  c.validate();
  auto f = expansion_factors(c);
  int nq = detail::qubit_count(sim);
  if (nq <= 0 || nq % (2 * c.n)) throw std::invalid_argument("input width must be a positive multiple of 2n");
  int x = nq / (2 * c.n);
  WeakLayout L;
  L.circuit = c;
  L.s = f.s;
  L.t = f.t;
  L.ring = ring;
  L.horizon = horizon;
  L.valid_first = 0;
  L.valid_count = x;
  if (ring) {
    if (x < 2) throw std::invalid_argument("ring tapes need at least two supercells");
    L.first = 0;
    L.count = x;
  } else {
    // edge corruption moves at light speed: one supercell per s steps, plus one for the data flow
    int pad = (int)((horizon + f.s - 1) / f.s) + 2;
    L.first = -pad;
    L.count = x + 2 * pad;
  }
  auto sc = weak::supercell(c);
  std::vector<Cell> bg;
  for (auto& w : sc) bg.push_back(w.pack());
  SparseState out;
  out.alpha = &weak_alphabet();
  out.ring = ring;
  const std::int64_t N = L.ring_length();
  for (auto& [cfg, amp] : sim.terms) {
    std::vector<Cell> word((std::size_t)N);
    std::int64_t base = ring ? 0 : L.origin + (std::int64_t)L.first * L.s;
    for (int j = L.first; j < L.first + L.count; ++j)
      for (int i = 0; i < L.s; ++i) {
        weak::WeakCell w = sc[(std::size_t)i];
        if (i >= L.s - 2 * c.n) {
          int q = (j - L.valid_first) * 2 * c.n + (i - (L.s - 2 * c.n));
          bool inside = j >= 0 && j < x;
          w.data = inside ? (int)cfg.cells[(std::size_t)q] : (empty_padding ? 0 : 1);
        }
        std::int64_t pos = L.origin + (std::int64_t)j * L.s + i;
        std::int64_t k = ring ? ((pos % N) + N) % N : pos - base;
        word[(std::size_t)k] = w.pack();
      }
    if (ring)
      out.add(Config{0, std::move(word)}, amp);
    else
      out.add(canonicalize(base, std::move(word)), amp);
  }
  return {out, L};
}

struct DecodeReport {
  double deficit = 0;            // weight of terms whose background is wrong
  std::string first_mismatch;    // empty if none
  double window_purity_gap = 0;  // padded tapes: how far the window is from a product with the outside
};

namespace weak {

// Background (program, mode) of one supercell period after `steps` steps; data plays no part.
inline std::vector<std::pair<int, int>> background_after(const WeakLayout& L, long steps) {
  auto sc = supercell(L.circuit);
  // two periods so the ring is long enough for any s
  std::vector<Cell> w;
  for (int rep = 0; rep < 2; ++rep)
    for (auto& c : sc) w.push_back(c.pack());
  // rotate so that cell 0 of the ring is absolute cell 0 (origin is 1)
  std::vector<Cell> r(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) r[(i + (std::size_t)L.origin) % w.size()] = w[i];
  auto st = SparseState::basis(weak_alphabet(), Config{0, r}, true);
  st = evolve(st, steps, rule());
  const auto& cells = st.terms.begin()->first.cells;
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < L.s; ++i) {
    auto c = WeakCell::unpack(cells[(std::size_t)i]);
    out.emplace_back(c.program, c.mode);
  }
  return out;
}

}  // namespace weak

// After k macro-steps, supercell j's data block sits at data_start(j) + k*s/2 and holds logical
// qubits [2n*j + k*n, 2n*j + k*n + 2n).
inline std::pair<SparseState, DecodeReport> decode_weak(const SparseState& st, const WeakLayout& L, int k,
                                                        long steps_done) {
  if (steps_done != (long)k * L.t) throw std::invalid_argument("decode only at whole macro-steps");
  const int n = L.circuit.n;
  const std::int64_t N = L.ring_length();
  auto bg = weak::background_after(L, steps_done);
  DecodeReport rep;
  // padded tapes: edge corruption reaches steps_done cells in from each end
  std::int64_t lo = L.origin + (std::int64_t)L.first * L.s, hi = lo + N;
  std::int64_t chk_lo = L.ring ? 0 : lo + steps_done, chk_hi = L.ring ? N : hi - steps_done;
  auto cell_at = [&](const Config& c, std::int64_t pos) -> Cell {
    if (L.ring) return c.cells[(std::size_t)(((pos % N) + N) % N)];
    return c.at(pos);
  };
  auto mod = [](std::int64_t a, std::int64_t m) { return ((a % m) + m) % m; };
  const int nq_total = 2 * n * L.count;
  SparseState full;
  full.alpha = &sim_alphabet();
  full.ring = L.ring;
  for (auto& [cfg, amp] : st.terms) {
    bool ok = true;
    for (std::int64_t pos = chk_lo; pos < chk_hi && ok; ++pos) {
      auto w = weak::WeakCell::unpack(cell_at(cfg, pos));
      auto e = bg[(std::size_t)mod(pos, L.s)];
      if (w.program != e.first || w.mode != e.second) {
        ok = false;
        if (rep.first_mismatch.empty()) rep.first_mismatch = "cell " + std::to_string(pos);
      }
    }
    if (!ok) {
      rep.deficit += std::norm(amp);
      continue;
    }
    // logical qubit index -> digit; index 0 is logical qubit 2n*first + k*n
    std::vector<Cell> q((std::size_t)nq_total);
    for (int j = L.first; j < L.first + L.count; ++j) {
      std::int64_t start = L.data_start(j) + (std::int64_t)k * (L.s / 2);
      for (int i = 0; i < 2 * n; ++i) {
        auto w = weak::WeakCell::unpack(cell_at(cfg, start + i));
        q[(std::size_t)((j - L.first) * 2 * n + i)] = (Cell)w.data;
      }
    }
    full.add(Config{0, std::move(q)}, amp);
  }
  if (rep.deficit > 1e-10) throw std::runtime_error("background mismatch at " + rep.first_mismatch);
  if (L.ring) {
    // rotate so that word index i is logical qubit i
    SparseState out;
    out.alpha = &sim_alphabet();
    out.ring = true;
    for (auto& [c, a] : full.terms) {
      std::vector<Cell> w(c.cells.size());
      for (std::size_t i = 0; i < w.size(); ++i) w[(std::size_t)mod((std::int64_t)i + (std::int64_t)k * n, nq_total)] = c.cells[i];
      out.add(Config{0, w}, a);
    }
    return {out, rep};
  }
  // padded: cut out logical qubits [0, 2n*valid_count); they must factor from the rest
  const int off = -2 * n * L.first - k * n;  // word index of logical qubit 0
  const int wlen = 2 * n * L.valid_count;
  std::map<std::vector<Cell>, std::map<std::vector<Cell>, cplx>> by_outside;
  for (auto& [c, a] : full.terms) {
    std::vector<Cell> in(c.cells.begin() + off, c.cells.begin() + off + wlen);
    std::vector<Cell> outside(c.cells.begin(), c.cells.begin() + off);
    outside.insert(outside.end(), c.cells.begin() + off + wlen, c.cells.end());
    by_outside[outside][in] += a;
  }
  const std::map<std::vector<Cell>, cplx>* best = nullptr;
  double bw = -1;
  for (auto& [o, m] : by_outside) {
    double w = 0;
    for (auto& [i, a] : m) w += std::norm(a);
    if (w > bw) bw = w, best = &m;
  }
  SparseState win;
  win.alpha = &sim_alphabet();
  for (auto& [i, a] : *best) win.add(canonicalize(0, i), a);
  win.normalize();
  // the window is a product with the outside iff every branch is parallel to the heaviest one
  double gap = 0;
  for (auto& [o, m] : by_outside) {
    cplx ov = 0;
    double w = 0;
    for (auto& [i, a] : m) {
      w += std::norm(a);
      auto it = win.terms.find(canonicalize(0, i));
      if (it != win.terms.end()) ov += std::conj(it->second) * a;
    }
    gap += w - std::norm(ov);
  }
  rep.window_purity_gap = gap;
  if (gap > 1e-9) throw std::runtime_error("decoded window is entangled with the padding");
  return {win, rep};
}

// Single-shot encoding: each gate's two halves start 4n cells apart per gate on either side of
// the data and meet once, over their target pair, at step 4n*i + 2n (+1 for odd pairs).
struct OnceLayout {
  Circuit circuit;
  std::int64_t data_start = 0;
  long steps = 0;  // steps after which every gate has acted
};

inline std::pair<SparseState, OnceLayout> encode_circuit_once(const Circuit& c, const SparseState& sim) {
  c.validate();
  int nq = detail::qubit_count(sim);
  if (nq != 2 * c.n) throw std::invalid_argument("single-shot input must have 2n qubits");
  const int n = c.n, m = c.m();
  const std::int64_t A = 4LL * n * m;
  std::vector<weak::WeakCell> bg((std::size_t)(2 * A + 2 * n), weak::filler());
  long last = 0;
  for (int i = 0; i < m; ++i) {
    auto pg = c.gates[(std::size_t)i];
    std::int64_t cpos = A + n - 1 + pg.pos;
    long tau = 4L * n * i + 2 * n + (long)(cpos & 1);
    bg[(std::size_t)(cpos - tau)] = {0, weak::left_code(pg.gate), 1};
    bg[(std::size_t)(cpos + 1 + tau)] = {0, weak::right_code(pg.gate), 1};
    last = tau + 1;
  }
  OnceLayout L{c, A, std::max(last, 4L * n * m)};
  SparseState out;
  out.alpha = &weak_alphabet();
  for (auto& [cfg, amp] : sim.terms) {
    std::vector<Cell> w;
    for (std::size_t i = 0; i < bg.size(); ++i) {
      auto cell = bg[i];
      if ((std::int64_t)i >= A && (std::int64_t)i < A + 2 * n) cell.data = cfg.cells[(std::size_t)(i - A)];
      w.push_back(cell.pack());
    }
    out.add(canonicalize(0, w), amp);
  }
  return {out, L};
}

inline SparseState decode_once(const SparseState& st, const OnceLayout& L) {
  SparseState out;
  out.alpha = &sim_alphabet();
  for (auto& [cfg, amp] : st.terms) {
    std::vector<Cell> q;
    for (int i = 0; i < 2 * L.circuit.n; ++i) q.push_back((Cell)weak::WeakCell::unpack(cfg.at(L.data_start + i)).data);
    out.add(canonicalize(0, q), amp);
  }
  return out;
}

}  // namespace uqca
