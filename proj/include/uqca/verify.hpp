#pragma once
// Independent oracles and axiom checks.

#include <algorithm>
#include <climits>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core.hpp"
#include "factored.hpp"
#include "strong.hpp"
#include "strong_compiler.hpp"
#include "gates.hpp"
#include "weak_compiler.hpp"

namespace uqca {

// What the simulated QCA does to a block that is only partly filled with qubits.
enum class QPolicy {
  Identity,  // leave the block alone
  LoneSwap,  // n=1 only: a lone qubit changes side within its pair
};

// One step of the directly simulated QCA: the circuit's 2^{2n} matrix on blocks of 2n qubit cells
// starting at k*n (mod 2n); macro index k selects the partition.
class DirectPqca {
 public:
  DirectPqca(const Circuit& c, QPolicy p = QPolicy::Identity) : c_(c), v_(circuit_matrix(c)), policy_(p) {
    if (p == QPolicy::LoneSwap && c.n != 1) throw std::invalid_argument("lone-swap policy needs n=1");
  }
  const Mat& matrix() const { return v_; }

  SparseState step(const SparseState& s, int k) const {
    const int B = 2 * c_.n;
    SparseState out;
    out.alpha = &sim_alphabet();
    out.ring = s.ring;
    for (auto& [cfg, amp] : s.terms) {
      std::vector<std::pair<std::vector<Cell>, cplx>> cur;
      std::int64_t lo, len;
      if (s.ring) {
        if ((std::int64_t)cfg.cells.size() % B) throw std::invalid_argument("ring length must be a multiple of 2n");
        lo = 0;
        len = (std::int64_t)cfg.cells.size();
        cur.push_back({cfg.cells, amp});
      } else {
        if (cfg.cells.empty()) {
          out.add(cfg, amp);
          continue;
        }
        std::int64_t phase = (std::int64_t)k * c_.n;
        lo = cfg.offset - (((cfg.offset - phase) % B) + B) % B;
        std::int64_t hi = cfg.end() + (((phase - cfg.end()) % B) + B) % B;
        len = hi - lo;
        std::vector<Cell> w((std::size_t)len, 0);
        std::copy(cfg.cells.begin(), cfg.cells.end(), w.begin() + (cfg.offset - lo));
        cur.push_back({w, amp});
      }
      std::int64_t first = s.ring ? (((std::int64_t)k * c_.n) % len) : 0;
      for (std::int64_t b = 0; b < len / B; ++b) {
        std::vector<std::pair<std::vector<Cell>, cplx>> next;
        for (auto& [w, a] : cur) apply_block(w, a, (first + b * B) % len, len, next);
        cur.swap(next);
      }
      for (auto& [w, a] : cur) {
        if (s.ring)
          out.add(Config{0, w}, a);
        else
          out.add(canonicalize(lo, w), a);
      }
    }
    out.prune(1e-15);
    return out;
  }

 private:
  void apply_block(const std::vector<Cell>& w, cplx a, std::int64_t start, std::int64_t len,
                   std::vector<std::pair<std::vector<Cell>, cplx>>& out) const {
    const int B = 2 * c_.n;
    int present = 0;
    for (int i = 0; i < B; ++i) present += w[(std::size_t)((start + i) % len)] != 0;
    if (present == 0) {
      out.push_back({w, a});
      return;
    }
    if (present < B) {
      auto v = w;
      if (policy_ == QPolicy::LoneSwap)
        std::swap(v[(std::size_t)(start % len)], v[(std::size_t)((start + 1) % len)]);
      out.push_back({v, a});
      return;
    }
    int col = 0;
    for (int i = 0; i < B; ++i) col = 2 * col + (w[(std::size_t)((start + i) % len)] - 1);
    for (int row = 0; row < v_.n; ++row) {
      cplx e = v_(row, col);
      if (e == 0.0) continue;
      auto v = w;
      for (int i = 0; i < B; ++i) v[(std::size_t)((start + i) % len)] = (Cell)(((row >> (B - 1 - i)) & 1) + 1);
      out.push_back({v, a * e});
    }
  }

  Circuit c_;
  Mat v_;
  QPolicy policy_;
};

// Two-layer (Margolus) QCA with blocks u0 on even pairs and u1 on odd pairs, embedded as a
// single scattering unitary. Cells are q or (tag, value) with value in [0, D): a pair of
// equal tags t gets u_t and both tags flip; otherwise only the tags flip.
class TwoLayerRule : public PairRule {
 public:
  TwoLayerRule(const Mat& u0, const Mat& u1) : u_{u0, u1} {
    if (u0.n != u1.n) throw std::invalid_argument("layer unitaries differ in dimension");
    int d = (int)std::lround(std::sqrt((double)u0.n));
    if (d * d != u0.n) throw std::invalid_argument("layer unitary must act on two equal cells");
    D_ = d;
    alpha_ = Alphabet{"twolayer" + std::to_string(d), {2 * d + 1}};
  }
  const Alphabet& alphabet() const override { return alpha_; }
  int value_dim() const { return D_; }
  Cell encode(int tag, int v) const { return (Cell)(1 + tag * D_ + v); }
  std::pair<int, int> decode(Cell c) const { return {(c - 1) / D_, (c - 1) % D_}; }

  void apply(Cell x, Cell y, std::vector<PairOut>& out) const override {
    if (x == 0 || y == 0) {
      auto flip = [&](Cell c) -> Cell {
        if (!c) return c;
        auto [t, v] = decode(c);
        return encode(1 - t, v);
      };
      out.push_back({flip(x), flip(y), 1.0});
      return;
    }
    auto [tx, vx] = decode(x);
    auto [ty, vy] = decode(y);
    if (tx != ty) {
      out.push_back({encode(1 - tx, vx), encode(1 - ty, vy), 1.0});
      return;
    }
    const Mat& u = u_[tx];
    int col = vx * D_ + vy;
    for (int row = 0; row < u.n; ++row)
      if (u(row, col) != 0.0) out.push_back({encode(1 - tx, row / D_), encode(1 - tx, row % D_), u(row, col)});
  }

  Mat dense() const {
    int d = alpha_.dim();
    Mat m(d * d);
    std::vector<PairOut> o;
    for (int x = 0; x < d; ++x)
      for (int y = 0; y < d; ++y) {
        o.clear();
        apply((Cell)x, (Cell)y, o);
        for (auto& r : o) m(r.x * d + r.y, x * d + y) += r.amp;
      }
    return m;
  }

 private:
  Mat u_[2];
  int D_ = 0;
  Alphabet alpha_;
};

// Random cell drawn uniformly from the alphabet, optionally allowing quiescent.
inline Cell random_cell(const Alphabet& a, std::mt19937_64& rng) {
  return (Cell)(rng() % (std::uint64_t)a.dim());
}

inline cplx gaussian_amp(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return {g(rng), g(rng)};
}

// Haar-like random superposition of `terms` random words of `width` cells at `offset`.
inline SparseState random_state(const Alphabet& a, int width, int terms, std::int64_t offset, std::mt19937_64& rng,
                                const std::function<Cell(std::mt19937_64&)>& draw = nullptr) {
  SparseState s;
  s.alpha = &a;
  while ((int)s.terms.size() < terms) {
    std::vector<Cell> w;
    for (int i = 0; i < width; ++i) w.push_back(draw ? draw(rng) : random_cell(a, rng));
    s.add(canonicalize(offset, w), gaussian_amp(rng));
  }
  s.normalize();
  return s;
}

inline double max_amp_diff(const SparseState& a, const SparseState& b) {
  double m = 0;
  for (auto& [c, x] : a.terms) {
    auto it = b.terms.find(c);
    m = std::max(m, std::abs(x - (it == b.terms.end() ? cplx(0) : it->second)));
  }
  for (auto& [c, y] : b.terms)
    if (!a.terms.count(c)) m = std::max(m, std::abs(y));
  return m;
}

struct CheckReport {
  int trials = 0;
  double max_dev = 0;
  bool pass = false;
  std::uint64_t seed = 0;
};

// Shifting by 2 cells commutes with 2-step evolution.
inline CheckReport check_shift_invariance(const PairRule& u, int trials, std::uint64_t seed, double tol = 1e-12,
                                          const std::function<Cell(std::mt19937_64&)>& draw = nullptr) {
  std::mt19937_64 rng(seed);
  CheckReport r{trials, 0, false, seed};
  for (int t = 0; t < trials; ++t) {
    int width = 2 + (int)(rng() % 4);
    auto psi = random_state(u.alphabet(), width, 1 + (int)(rng() % 4), (std::int64_t)(rng() % 7) - 3, rng, draw);
    auto a = shift(evolve(psi, 2, u), 2);
    auto b = evolve(shift(psi, 2), 2, u);
    r.max_dev = std::max(r.max_dev, max_amp_diff(a, b));
  }
  r.pass = r.max_dev <= tol;
  return r;
}

using Density = std::map<std::pair<Cell, Cell>, cplx>;

// Reduced density matrix of the single cell at pos.
inline Density reduced_cell(const SparseState& s, std::int64_t pos) {
  std::map<std::vector<std::pair<std::int64_t, Cell>>, std::vector<std::pair<Cell, cplx>>> groups;
  for (auto& [c, a] : s.terms) {
    std::vector<std::pair<std::int64_t, Cell>> rest;
    for (std::int64_t i = c.offset; i < c.end(); ++i)
      if (i != pos && c.at(i)) rest.emplace_back(i, c.at(i));
    groups[rest].emplace_back(c.at(pos), a);
  }
  Density rho;
  for (auto& [k, list] : groups)
    for (auto& [x, a] : list)
      for (auto& [y, b] : list) rho[{x, y}] += a * std::conj(b);
  return rho;
}

inline double density_diff(const Density& a, const Density& b) {
  double m = 0;
  for (auto& [k, v] : a) {
    auto it = b.find(k);
    m = std::max(m, std::abs(v - (it == b.end() ? cplx(0) : it->second)));
  }
  for (auto& [k, v] : b)
    if (!a.count(k)) m = std::max(m, std::abs(v));
  return m;
}

// Radius-1/2 causality: two states with equal reduced state on the pair {i,i+1} (the pair acted on at
// this step) give equal reduced states on cell i and on cell i+1 after the step. The states are
// built as sum_k c_k |pair_k>|rest_k> and sum_k c_k |pair_k>|pi(rest_k)> with distinct rest words.
inline CheckReport check_causality(const PairRule& u, int trials, std::uint64_t seed, double tol = 1e-9,
                                   const std::function<Cell(std::mt19937_64&)>& draw = nullptr) {
  std::mt19937_64 rng(seed);
  const Alphabet& al = u.alphabet();
  auto cell = [&]() { return draw ? draw(rng) : random_cell(al, rng); };
  CheckReport r{trials, 0, false, seed};
  for (int t = 0; t < trials; ++t) {
    int parity = (int)(rng() % 2);
    std::int64_t i = parity;  // pair (i, i+1) is a block at this parity
    int left = (int)(rng() % 2) * 2, right = 1 + (int)(rng() % 2);  // total width <= 5
    int K = 1 + (int)(rng() % 3);
    std::set<std::vector<Cell>> used;
    std::vector<std::vector<Cell>> rests, rests2;
    while ((int)rests.size() < K) {
      std::vector<Cell> w;
      for (int k = 0; k < left + right; ++k) w.push_back(cell());
      if (used.insert(w).second) rests.push_back(w);
    }
    while ((int)rests2.size() < K) {
      std::vector<Cell> w;
      for (int k = 0; k < left + right; ++k) w.push_back(cell());
      if (std::find(rests2.begin(), rests2.end(), w) == rests2.end()) rests2.push_back(w);
    }
    SparseState a, b;
    a.alpha = b.alpha = &al;
    for (int k = 0; k < K; ++k) {
      cplx c = gaussian_amp(rng);
      Cell p0 = cell(), p1 = cell();
      auto build = [&](const std::vector<Cell>& rest) {
        std::vector<Cell> w(rest.begin(), rest.begin() + left);
        w.push_back(p0);
        w.push_back(p1);
        w.insert(w.end(), rest.begin() + left, rest.end());
        return canonicalize(i - left, w);
      };
      a.add(build(rests[(std::size_t)k]), c);
      b.add(build(rests2[(std::size_t)k]), c);
    }
    a.normalize();
    b.normalize();
    auto a1 = step(a, parity, u), b1 = step(b, parity, u);
    r.max_dev = std::max(r.max_dev, density_diff(reduced_cell(a1, i), reduced_cell(b1, i)));
    r.max_dev = std::max(r.max_dev, density_diff(reduced_cell(a1, i + 1), reduced_cell(b1, i + 1)));
  }
  r.pass = r.max_dev <= tol;
  return r;
}

struct FidelityReport {
  std::vector<double> fidelities;  // one per macro-step
  double eps = 0;                  // 1 - min fidelity
  bool pass = false;
};

// Gate log of the direct simulation on a register of nq qubits for K macro-steps: at step k the
// circuit acts on every block of 2n qubits starting at k*n mod 2n. Finite registers skip
// incomplete edge blocks; their influence stays outside the light cone of interior windows.
inline std::vector<GateEvent> oracle_events(const Circuit& c, int nq, int K, bool ring = false) {
  const int n = c.n, B = 2 * n;
  std::vector<GateEvent> ev;
  for (int k = 0; k < K; ++k) {
    int first = (k * n) % B;
    for (int start = first - B; start < nq; start += B) {
      if (!ring && (start < 0 || start + B > nq)) continue;
      if (ring && (start < 0 || nq % B)) continue;
      for (auto& pg : c.gates) {
        int a = start + n - 1 + pg.pos;
        ev.push_back({k, a % nq, (a + 1) % nq, to_gate4(native_gate(pg.gate))});
      }
    }
  }
  return ev;
}

// Largest distance between two qubits of a block that one application of the circuit can couple.
inline int circuit_reach(const Circuit& c) {
  if (c.gates.empty()) return 0;
  std::vector<int> comp((std::size_t)(2 * c.n));
  for (int i = 0; i < 2 * c.n; ++i) comp[(std::size_t)i] = i;
  std::function<int(int)> root = [&](int i) { return comp[(std::size_t)i] == i ? i : comp[(std::size_t)i] = root(comp[(std::size_t)i]); };
  for (auto& g : c.gates) comp[(std::size_t)root(c.n - 1 + g.pos)] = root(c.n + g.pos);
  int reach = 0;
  for (int i = 0; i < 2 * c.n; ++i)
    for (int j = i + 1; j < 2 * c.n; ++j)
      if (root(i) == root(j)) reach = std::max(reach, j - i);
  return reach;
}

// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 of two density matrices. Eigenvalues
// below 1e-13 are roundoff and count as zero; their square roots would otherwise add ~1e-8.
inline double mixed_fidelity(const Mat& rho, const Mat& sigma) {
  auto clip = [](const Eigen::VectorXd& v) { return v.unaryExpr([](double x) { return x < 1e-13 ? 0.0 : std::sqrt(x); }); };
  using M = Eigen::MatrixXcd;
  auto to = [](const Mat& m) {
    M r(m.n, m.n);
    for (int i = 0; i < m.n; ++i)
      for (int j = 0; j < m.n; ++j) r(i, j) = m(i, j);
    return r;
  };
  auto psd_sqrt = [&](const M& m) {
    Eigen::SelfAdjointEigenSolver<M> es(m);
    Eigen::VectorXd ev = clip(es.eigenvalues());
    return M(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint());
  };
  M sr = psd_sqrt(to(rho));
  M inner = sr * to(sigma) * sr;
  inner = (inner + inner.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<M> es(inner);
  double tr = clip(es.eigenvalues()).sum();
  return tr * tr;
}

// Projects a weak or strong state onto the (data, program, mode) words of cells [a, b).
inline std::map<std::vector<Cell>, cplx> weak_projection(const SparseState& st, std::int64_t a, std::int64_t b) {
  const bool strong = *st.alpha == strong_alphabet();
  std::map<std::vector<Cell>, cplx> out;
  for (auto& [c, amp] : st.terms) {
    std::vector<Cell> w;
    for (std::int64_t i = a; i < b; ++i)
      w.push_back(strong ? strong::StrongCell::unpack(c.at(i)).weak_part().pack() : c.at(i));
    out[w] += amp;
  }
  return out;
}

inline double projection_diff(const std::map<std::vector<Cell>, cplx>& x, const std::map<std::vector<Cell>, cplx>& y) {
  double m = 0;
  for (auto& [k, v] : x) {
    auto it = y.find(k);
    m = std::max(m, std::abs(v - (it == y.end() ? cplx(0) : it->second)));
  }
  for (auto& [k, v] : y)
    if (!x.count(k)) m = std::max(m, std::abs(v));
  return m;
}

// Weak ring run against the direct simulation, one fidelity per macro-step.
inline FidelityReport weak_ring_fidelity(const Circuit& c, SparseState sim, int K) {
  sim.ring = true;
  auto [st, L] = encode_weak(c, sim, true);
  DirectPqca oracle(c);
  FidelityReport r;
  auto expect = sim;
  for (int k = 0; k < K; ++k) {
    st = evolve(st, L.t, weak::rule(), (int)((long)k * L.t % 2));
    expect = oracle.step(expect, k);
    auto got = decode_weak(st, L, k + 1, (long)(k + 1) * L.t);
    r.fidelities.push_back(fidelity(got.first, expect) * (1 - got.second.deficit));
  }
  r.eps = 1 - *std::min_element(r.fidelities.begin(), r.fidelities.end());
  r.pass = r.eps <= 1e-9;
  return r;
}

struct StrongRunReport {
  FidelityReport fid;
  int qubits = 0;
  std::vector<int> window;            // logical qubits compared
  std::int64_t width = 0;             // initial tape size
  int r = 0, nominal_r = 0;           // realized and formula band-region radius
  std::vector<std::int64_t> woven;    // woven-region width after each macro-step, starting at 0
  std::vector<std::int64_t> extent;   // nonquiescent extent after each macro-step
  bool tracked = true;                // qubits sat where the layout says
  bool background = true;             // woven region matched the weak background
  StrongLayout layout;
};

// Strong run of a product input. The tape evolves classically with only data presence, the
// data see a log of two-qubit gates, and the reduced state of a central window is compared with
// the direct simulation of the same product input. Edge blocks of a finite register are only
// partly filled, so the register is padded until the window stays clear of their influence.
inline StrongRunReport strong_window_fidelity(const Circuit& c, const std::vector<Qubit>& central, int K) {
  const int n = c.n, B = 2 * n;
  const int margin = K * (n + circuit_reach(c)) + 1;
  int nq = 2 * margin + (int)central.size();
  nq = (nq + B - 1) / B * B;
  const int q0 = (nq - (int)central.size()) / 2;
  std::vector<Qubit> init((std::size_t)nq, Qubit{1.0, 0.0});
  for (std::size_t i = 0; i < central.size(); ++i) init[(std::size_t)q0 + i] = central[i];

  StrongRunReport rep;
  rep.qubits = nq;
  for (int i = 0; i < (int)central.size(); ++i) rep.window.push_back(q0 + i);
  auto [st, L] = encode_strong(c, sim_basis(std::vector<int>((std::size_t)nq, 0)));
  rep.layout = L;
  rep.width = L.width();
  rep.r = L.r;
  rep.nominal_r = L.nominal_r();
  FactoredRun fr(strong::rule(), strong::D, st.terms.begin()->first);
  WeakLayout wl;
  wl.circuit = c;
  wl.s = L.s;
  wl.t = L.t;
  wl.origin = L.origin;
  auto record = [&](int k) {
    auto sk = fr.skeleton();
    auto [a, b] = woven_region(sk, L);
    rep.woven.push_back(b - a);
    rep.extent.push_back((std::int64_t)sk.cells.size());
    auto bg = weak::background_after(wl, (long)k * L.t);
    for (auto i = a; i < b; ++i) {
      auto cc = strong::StrongCell::unpack(sk.at(i));
      auto e = bg[(std::size_t)pmod(i, L.s)];
      if (cc.program != e.first || cc.mode != e.second) rep.background = false;
    }
  };
  record(0);
  for (int k = 1; k <= K; ++k) {
    fr.run(L.t);
    record(k);
    std::vector<int> ids;
    for (int q : rep.window) {
      int id = fr.qubit_at(L.qubit_cell(q, k));
      if (id != q) rep.tracked = false;
      ids.push_back(id);
    }
    double f = 0;
    if (rep.tracked) {
      Mat got = cone_reduced_state(init, fr.log(), ids);
      Mat want = cone_reduced_state(init, oracle_events(c, nq, k), rep.window);
      f = mixed_fidelity(got, want);
    }
    rep.fid.fidelities.push_back(f);
  }
  rep.fid.eps = 1 - *std::min_element(rep.fid.fidelities.begin(), rep.fid.fidelities.end());
  rep.fid.pass = rep.fid.eps <= 1e-9 && rep.tracked && rep.background;
  return rep;
}

inline std::vector<Qubit> basis_qubits(const std::string& bits) {
  std::vector<Qubit> q;
  for (char ch : bits) q.push_back(ch == '1' ? Qubit{0.0, 1.0} : Qubit{1.0, 0.0});
  return q;
}

inline Qubit random_qubit(std::mt19937_64& rng) {
  Qubit q{gaussian_amp(rng), gaussian_amp(rng)};
  double nn = std::sqrt(std::norm(q[0]) + std::norm(q[1]));
  return {q[0] / nn, q[1] / nn};
}

}  // namespace uqca
