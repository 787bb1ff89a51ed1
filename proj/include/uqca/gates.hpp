#pragma once
// Small dense unitaries, controlled-gate layers and unitarity checks.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "core.hpp"

namespace uqca {

struct Mat {
  int n = 0;
  std::vector<cplx> a;

  Mat() = default;
  explicit Mat(int n_) : n(n_), a((std::size_t)n_ * n_, 0.0) {}
  static Mat identity(int n) {
    Mat m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  cplx& operator()(int r, int c) { return a[(std::size_t)r * n + c]; }
  cplx operator()(int r, int c) const { return a[(std::size_t)r * n + c]; }
};

inline Mat operator*(const Mat& x, const Mat& y) {
  if (x.n != y.n) throw std::invalid_argument("matrix size mismatch");
  Mat r(x.n);
  for (int i = 0; i < x.n; ++i)
    for (int k = 0; k < x.n; ++k) {
      cplx v = x(i, k);
      if (v == 0.0) continue;
      for (int j = 0; j < x.n; ++j) r(i, j) += v * y(k, j);
    }
  return r;
}

inline Mat adjoint(const Mat& x) {
  Mat r(x.n);
  for (int i = 0; i < x.n; ++i)
    for (int j = 0; j < x.n; ++j) r(i, j) = std::conj(x(j, i));
  return r;
}

inline Mat kron(const Mat& x, const Mat& y) {
  Mat r(x.n * y.n);
  for (int i = 0; i < x.n; ++i)
    for (int j = 0; j < x.n; ++j)
      for (int k = 0; k < y.n; ++k)
        for (int l = 0; l < y.n; ++l) r(i * y.n + k, j * y.n + l) = x(i, j) * y(k, l);
  return r;
}

inline double max_abs_diff(const Mat& x, const Mat& y) {
  double m = 0;
  for (std::size_t i = 0; i < x.a.size(); ++i) m = std::max(m, std::abs(x.a[i] - y.a[i]));
  return m;
}

struct UnitaryReport {
  double max_dev = 0;
  int row = -1, col = -1;  // location of the largest deviation of U^dagger U from I
  bool pass = false;
};

inline UnitaryReport check_unitary(const Mat& u, double tol = 1e-12) {
  UnitaryReport r;
  for (int i = 0; i < u.n; ++i)
    for (int j = 0; j < u.n; ++j) {
      cplx g = 0;
      for (int k = 0; k < u.n; ++k) g += std::conj(u(k, i)) * u(k, j);
      double d = std::abs(g - (i == j ? 1.0 : 0.0));
      if (d > r.max_dev) r = {d, i, j, false};
    }
  r.pass = r.max_dev <= tol;
  return r;
}

enum class Gate { Swap, H2, H1, CPhase };  // H2 = I (x) H, H1 = H (x) I

inline const char* gate_name(Gate g) {
  switch (g) {
    case Gate::Swap: return "swap";
    case Gate::H2: return "h2";
    case Gate::H1: return "h1";
    case Gate::CPhase: return "cphase";
  }
  return "?";
}

inline Gate gate_from_name(const std::string& s) {
  if (s == "swap") return Gate::Swap;
  if (s == "h2") return Gate::H2;
  if (s == "h1") return Gate::H1;
  if (s == "cphase") return Gate::CPhase;
  throw std::invalid_argument("unknown gate " + s);
}

inline const cplx& phase_pi8() {
  static const cplx w = std::polar(1.0, std::numbers::pi / 8);
  return w;
}

inline Mat hadamard() {
  Mat h(2);
  double r = 1 / std::sqrt(2.0);
  h(0, 0) = r, h(0, 1) = r, h(1, 0) = r, h(1, 1) = -r;
  return h;
}

// Two-qubit gates on |ab>, index 2a+b, a being the left qubit.
inline Mat native_gate(Gate g) {
  switch (g) {
    case Gate::Swap: {
      Mat m(4);
      m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1.0;
      return m;
    }
    case Gate::H2: return kron(Mat::identity(2), hadamard());
    case Gate::H1: return kron(hadamard(), Mat::identity(2));
    case Gate::CPhase: {
      Mat m = Mat::identity(4);
      m(3, 3) = phase_pi8();
      return m;
    }
  }
  throw std::invalid_argument("unknown gate");
}

inline Mat cnot() {
  Mat m(4);
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
  return m;
}

// cNot = (I(x)H) cPhase^8 (I(x)H), listed in application order.
inline std::vector<Gate> derived_cnot() {
  std::vector<Gate> seq{Gate::H2};
  for (int i = 0; i < 8; ++i) seq.push_back(Gate::CPhase);
  seq.push_back(Gate::H2);
  return seq;
}

inline Mat product(const std::vector<Gate>& seq) {
  Mat r = Mat::identity(4);
  for (Gate g : seq) r = native_gate(g) * r;
  return r;
}

struct AncillaCase {
  std::vector<cplx> in, expected;  // 4-vectors on |ancilla, target>
};

// cPhase on |1> (x) psi equals |1> (x) diag(1, e^{i pi/8}) psi; inputs |0>psi pass unchanged.
inline std::vector<AncillaCase> phase_via_ancilla_cases() {
  std::vector<AncillaCase> cs;
  const double r = 1 / std::sqrt(2.0);
  std::vector<std::pair<cplx, cplx>> psis{{1, 0}, {0, 1}, {r, r}, {r, cplx(0, r)}, {0.6, cplx(0, -0.8)}};
  for (int anc = 0; anc < 2; ++anc)
    for (auto [a, b] : psis) {
      AncillaCase c;
      c.in.assign(4, 0.0);
      c.in[2 * anc] = a;
      c.in[2 * anc + 1] = b;
      c.expected = c.in;
      if (anc == 1) c.expected[3] *= phase_pi8();
      cs.push_back(c);
    }
  return cs;
}

// A system of subsystems with given sizes; basis states are digit vectors.
using Digits = std::vector<int>;

inline int tuple_index(const std::vector<int>& sizes, const std::vector<int>& subs, const Digits& d) {
  int v = 0;
  for (int s : subs) v = v * sizes[s] + d[s];
  return v;
}
inline void tuple_write(const std::vector<int>& sizes, const std::vector<int>& subs, Digits& d, int v) {
  for (int i = (int)subs.size() - 1; i >= 0; --i) {
    d[subs[i]] = v % sizes[subs[i]];
    v /= sizes[subs[i]];
  }
}
inline int tuple_dim(const std::vector<int>& sizes, const std::vector<int>& subs) {
  int n = 1;
  for (int s : subs) n *= sizes[s];
  return n;
}

// Block B_c applied to the targets for each control value c; identity for absent controls.
struct ControlledGate {
  std::string name;
  std::vector<int> controls, targets;
  std::map<Digits, Mat> table;
};

// A bijection on the digits of the targets, given as a function.
struct PermGate {
  std::string name;
  std::vector<int> targets;
  std::function<void(Digits&)> f;  // rewrites the digits at targets only
};

using AnyGate = std::variant<ControlledGate, PermGate>;

struct Layer {
  std::string name;
  std::vector<AnyGate> gates;
};

struct Structural {
  std::vector<int> sizes;  // subsystems of cell x followed by those of cell y
  std::vector<Layer> layers;
};

using Ket = std::vector<std::pair<Digits, cplx>>;

inline void apply_gate(const std::vector<int>& sizes, const AnyGate& g, Ket& ket) {
  if (auto* pg = std::get_if<PermGate>(&g)) {
    for (auto& [d, a] : ket) pg->f(d);
    return;
  }
  const auto& cg = std::get<ControlledGate>(g);
  Ket out;
  for (auto& [d, a] : ket) {
    Digits key;
    for (int c : cg.controls) key.push_back(d[c]);
    auto it = cg.table.find(key);
    if (it == cg.table.end()) {
      out.emplace_back(d, a);
      continue;
    }
    const Mat& m = it->second;
    int col = tuple_index(sizes, cg.targets, d);
    for (int row = 0; row < m.n; ++row) {
      cplx v = m(row, col);
      if (v == 0.0) continue;
      Digits e = d;
      tuple_write(sizes, cg.targets, e, row);
      out.emplace_back(std::move(e), a * v);
    }
  }
  // merge equal digit vectors
  std::map<Digits, cplx> acc;
  for (auto& [d, a] : out) acc[d] += a;
  ket.clear();
  for (auto& [d, a] : acc)
    if (a != 0.0) ket.emplace_back(d, a);
}

inline Ket apply_layer(const std::vector<int>& sizes, const Layer& l, Ket ket) {
  for (auto& g : l.gates) apply_gate(sizes, g, ket);
  return ket;
}

inline Ket apply_structural(const Structural& s, const Digits& in) {
  Ket k{{in, 1.0}};
  for (auto& l : s.layers) k = apply_layer(s.sizes, l, std::move(k));
  return k;
}

struct CertReport {
  bool pass = true;
  double max_dev = 0;
  std::string witness;
};

// Control-construct certificate: every block square, sized to its targets, unitary;
// controls and targets disjoint; permutation gates bijective on their target space.
inline CertReport certify_gate(const std::vector<int>& sizes, const AnyGate& g, double tol = 1e-12) {
  CertReport r;
  if (auto* pg = std::get_if<PermGate>(&g)) {
    int n = tuple_dim(sizes, pg->targets);
    std::vector<char> hit((std::size_t)n, 0);
    Digits d(sizes.size(), 0);
    for (int v = 0; v < n; ++v) {
      tuple_write(sizes, pg->targets, d, v);
      Digits e = d;
      pg->f(e);
      for (std::size_t i = 0; i < d.size(); ++i) {
        bool is_target = std::find(pg->targets.begin(), pg->targets.end(), (int)i) != pg->targets.end();
        if (!is_target && e[i] != d[i]) {
          r.pass = false;
          r.witness = pg->name + ": touches a non-target subsystem";
          return r;
        }
      }
      int w = tuple_index(sizes, pg->targets, e);
      if (hit[(std::size_t)w]++) {
        r.pass = false;
        r.witness = pg->name + ": not injective at target value " + std::to_string(v);
        return r;
      }
    }
    return r;
  }
  const auto& cg = std::get<ControlledGate>(g);
  for (int c : cg.controls)
    if (std::find(cg.targets.begin(), cg.targets.end(), c) != cg.targets.end()) {
      r.pass = false;
      r.witness = cg.name + ": control and target overlap";
      return r;
    }
  int n = tuple_dim(sizes, cg.targets);
  for (auto& [key, m] : cg.table) {
    if (m.n != n || key.size() != cg.controls.size()) {
      r.pass = false;
      r.witness = cg.name + ": block dimension mismatch";
      return r;
    }
    auto u = check_unitary(m, tol);
    r.max_dev = std::max(r.max_dev, u.max_dev);
    if (!u.pass) {
      r.pass = false;
      r.witness = cg.name + ": non-unitary block";
    }
  }
  return r;
}

inline CertReport certify_layer(const std::vector<int>& sizes, const Layer& l, double tol = 1e-12) {
  CertReport r;
  for (auto& g : l.gates) {
    auto c = certify_gate(sizes, g, tol);
    r.max_dev = std::max(r.max_dev, c.max_dev);
    if (!c.pass && r.pass) {
      r.pass = false;
      r.witness = l.name + "/" + c.witness;
    }
  }
  return r;
}

// Gram check on sampled basis columns of a layer: columns must be orthonormal.
inline CertReport sampled_gram(const std::vector<int>& sizes, const Layer& l, int samples, std::uint64_t seed,
                               double tol = 1e-12) {
  std::mt19937_64 rng(seed);
  std::vector<std::map<Digits, cplx>> cols;
  std::map<Digits, int> seen;
  while ((int)cols.size() < samples) {
    Digits d(sizes.size());
    for (std::size_t i = 0; i < sizes.size(); ++i) d[i] = (int)(rng() % (std::uint64_t)sizes[i]);
    if (!seen.emplace(d, (int)cols.size()).second) continue;
    std::map<Digits, cplx> col;
    for (auto& [e, a] : apply_layer(sizes, l, Ket{{d, 1.0}})) col[e] += a;
    cols.push_back(std::move(col));
  }
  // rows shared between sampled columns
  std::map<Digits, std::vector<std::pair<int, cplx>>> rows;
  for (int j = 0; j < (int)cols.size(); ++j)
    for (auto& [e, a] : cols[(std::size_t)j]) rows[e].emplace_back(j, a);
  std::map<std::pair<int, int>, cplx> gram;
  for (auto& [e, list] : rows)
    for (auto& [i, a] : list)
      for (auto& [j, b] : list) gram[{i, j}] += std::conj(a) * b;
  CertReport r;
  for (int j = 0; j < (int)cols.size(); ++j) {
    auto it = gram.find({j, j});
    double d = std::abs((it == gram.end() ? cplx(0) : it->second) - 1.0);
    if (d > r.max_dev) r.max_dev = d, r.witness = l.name + ": column norm";
  }
  for (auto& [ij, g] : gram)
    if (ij.first != ij.second && std::abs(g) > r.max_dev) r.max_dev = std::abs(g), r.witness = l.name + ": overlap";
  r.pass = r.max_dev <= tol;
  if (r.pass) r.witness.clear();
  return r;
}

// PairRule backed by a structural description, memoizing pair images.
class StructuralRule : public PairRule {
 public:
  StructuralRule(const Alphabet& a, Structural s) : alpha_(&a), s_(std::move(s)) {}
  const Alphabet& alphabet() const override { return *alpha_; }
  const Structural& structure() const { return s_; }

  void apply(Cell x, Cell y, std::vector<PairOut>& out) const override {
    std::uint32_t key = (std::uint32_t)x * (std::uint32_t)alpha_->dim() + y;
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, compute(x, y)).first;
    out.insert(out.end(), it->second.begin(), it->second.end());
  }

  std::vector<PairOut> compute(Cell x, Cell y) const {
    Digits d = alpha_->unpack(x);
    Digits dy = alpha_->unpack(y);
    d.insert(d.end(), dy.begin(), dy.end());
    std::vector<PairOut> res;
    const int k = alpha_->arity();
    for (auto& [e, a] : apply_structural(s_, d)) {
      Digits ex(e.begin(), e.begin() + k), ey(e.begin() + k, e.end());
      res.push_back({alpha_->pack(ex), alpha_->pack(ey), a});
    }
    return res;
  }

 private:
  const Alphabet* alpha_;
  Structural s_;
  mutable std::unordered_map<std::uint32_t, std::vector<PairOut>> cache_;
};

}  // namespace uqca
