#pragma once
// The weak universal machine: 36-dim cells (data, program, mode).

#include <array>

#include "core.hpp"
#include "gates.hpp"

namespace uqca::weak {

// data: 0 empty, 1 encoded |0>, 2 encoded |1>; program: 0 empty, 1 change colour, 2/3 gate halves;
// mode: 0 light, 1 middle, 2 dark grey.
struct WeakCell {
  int data = 0, program = 0, mode = 0;
  Cell pack() const { return weak_alphabet().pack({data, program, mode}); }
  static WeakCell unpack(Cell c) {
    auto d = weak_alphabet().unpack(c);
    return {d[0], d[1], d[2]};
  }
  bool operator==(const WeakCell&) const = default;
};

enum Sub { XD, XP, XM, YD, YP, YM };

inline Mat inc_mod(int n) {
  Mat m(n);
  for (int i = 0; i < n; ++i) m((i + 1) % n, i) = 1.0;
  return m;
}

// Swaps a lone datum across the pair: |0a> <-> |a0> for a != 0.
inline Mat lone_data_swap() {
  Mat m(9);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      int col = 3 * a + b;
      bool lone = (a == 0) != (b == 0);
      m(lone ? 3 * b + a : col, col) = 1.0;
    }
  return m;
}

// A two-qubit gate embedded on data pairs: acts on {1,2}x{1,2}, identity when either datum is empty.
inline Mat embed_on_data(const Mat& g) {
  Mat m = Mat::identity(9);
  for (int a = 1; a < 3; ++a)
    for (int b = 1; b < 3; ++b) {
      int col = 3 * a + b;
      m(col, col) = 0.0;
    }
  for (int a = 1; a < 3; ++a)
    for (int b = 1; b < 3; ++b)
      for (int c = 1; c < 3; ++c)
        for (int d = 1; d < 3; ++d) m(3 * c + d, 3 * a + b) = g(2 * (c - 1) + (d - 1), 2 * (a - 1) + (b - 1));
  return m;
}

// Collision table keyed on the program pair.
inline Gate gate_for_key(int xp, int yp) {
  if (xp == 2 && yp == 2) return Gate::Swap;
  if (xp == 2 && yp == 3) return Gate::H2;
  if (xp == 3 && yp == 2) return Gate::H1;
  return Gate::CPhase;
}

// Program codes of the left and right halves of each gate.
inline int left_code(Gate g) { return (g == Gate::Swap || g == Gate::H2) ? 2 : 3; }
inline int right_code(Gate g) { return (g == Gate::Swap || g == Gate::H1) ? 2 : 3; }

// at[] gives the position of each of the six pair subsystems inside a larger pair system.
inline std::vector<Layer> layers(const std::array<int, 6>& at) {
  auto S = [&](Sub s) { return at[s]; };
  Layer colour{"change-colour", {}};
  colour.gates.push_back(ControlledGate{"colour-x", {S(XP)}, {S(YM)}, {{{1}, inc_mod(3)}}});
  colour.gates.push_back(ControlledGate{"colour-y", {S(YP)}, {S(XM)}, {{{1}, inc_mod(3)}}});

  Layer drift{"S", {}};
  drift.gates.push_back(ControlledGate{"S", {S(XM), S(YM)}, {S(XD), S(YD)}, {{{0, 0}, lone_data_swap()}}});

  Layer collide{"M", {}};
  ControlledGate m{"M", {S(XP), S(YP)}, {S(XD), S(YD)}, {}};
  for (int a = 2; a < 4; ++a)
    for (int b = 2; b < 4; ++b) m.table[{a, b}] = embed_on_data(native_gate(gate_for_key(a, b)));
  collide.gates.push_back(m);

  Layer transport{"transport", {}};
  int xp = S(XP), xm = S(XM), yp = S(YP), ym = S(YM);
  transport.gates.push_back(PermGate{"transport", {xp, xm, yp, ym}, [=](Digits& d) {
                                       std::swap(d[xp], d[yp]);
                                       std::swap(d[xm], d[ym]);
                                     }});
  return {colour, drift, collide, transport};
}

inline Structural structural() { return {{3, 4, 3, 3, 4, 3}, layers({0, 1, 2, 3, 4, 5})}; }

// Table-driven rule: all 1296 pair images computed once from the layers.
class WeakRule : public PairRule {
 public:
  WeakRule() {
    StructuralRule s(weak_alphabet(), structural());
    const int d = weak_alphabet().dim();
    table_.resize((std::size_t)d * d);
    for (int x = 0; x < d; ++x)
      for (int y = 0; y < d; ++y) table_[(std::size_t)x * d + y] = s.compute((Cell)x, (Cell)y);
  }
  const Alphabet& alphabet() const override { return weak_alphabet(); }
  void apply(Cell x, Cell y, std::vector<PairOut>& out) const override {
    const auto& r = table_[(std::size_t)x * 36 + y];
    out.insert(out.end(), r.begin(), r.end());
  }

 private:
  std::vector<std::vector<PairOut>> table_;
};

inline const WeakRule& rule() {
  static const WeakRule r;
  return r;
}

// Dense 1296x1296 matrix, column index 36*x+y.
inline Mat dense() {
  const int d = 36;
  Mat m(d * d);
  std::vector<PairOut> out;
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y) {
      out.clear();
      rule().apply((Cell)x, (Cell)y, out);
      for (auto& o : out) m(o.x * d + o.y, x * d + y) += o.amp;
    }
  return m;
}

// Unitarity of a matrix whose columns are sparse, without the O(n^3) product.
inline UnitaryReport check_unitary_sparse(const Mat& u, double tol = 1e-12) {
  std::vector<std::vector<std::pair<int, cplx>>> rows((std::size_t)u.n);
  for (int c = 0; c < u.n; ++c)
    for (int r = 0; r < u.n; ++r)
      if (u(r, c) != 0.0) rows[(std::size_t)r].emplace_back(c, u(r, c));
  Mat g(u.n);
  for (auto& row : rows)
    for (auto& [i, a] : row)
      for (auto& [j, b] : row) g(i, j) += std::conj(a) * b;
  UnitaryReport rep;
  for (int i = 0; i < u.n; ++i)
    for (int j = 0; j < u.n; ++j) {
      double dv = std::abs(g(i, j) - (i == j ? 1.0 : 0.0));
      if (dv > rep.max_dev) rep = {dv, i, j, false};
    }
  rep.pass = rep.max_dev <= tol;
  return rep;
}

}  // namespace uqca::weak
