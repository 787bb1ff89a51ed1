#pragma once
// The strong universal machine: 15552-dim cells carrying the weak machine plus copy bands.

#include <array>
#include <vector>

#include "core.hpp"
#include "gates.hpp"
#include "weak.hpp"

namespace uqca::strong {

// Digit order (counter, data, wall, copy, bouncer, program, mode, history), sizes 3,3,3,4,4,4,3,3.
// wall: 0 none, 1 outer, 2 inner. The counter cycles 0->1->2 on wall cells and fires at 2.
struct StrongCell {
  int counter = 0, data = 0, wall = 0, copy = 0, bouncer = 0, program = 0, mode = 0, history = 0;
  Cell pack() const { return strong_alphabet().pack({counter, data, wall, copy, bouncer, program, mode, history}); }
  static StrongCell unpack(Cell c) {
    auto d = strong_alphabet().unpack(c);
    return {d[0], d[1], d[2], d[3], d[4], d[5], d[6], d[7]};
  }
  weak::WeakCell weak_part() const { return {data, program, mode}; }
  bool operator==(const StrongCell&) const = default;
};

enum Sub { C, D, W, CP, B, P, M, H };
constexpr int kArity = 8;

inline int inc3(int b) { return b == 0 ? 0 : b % 3 + 1; }

// Events seen by band bookkeeping: a fire writes the copy digit into a program slot at the
// outer wall; a mode computation offsets a slot's mode at the inner wall.
struct Event {
  enum Kind { Fire, ModeComputation } kind;
  int cell;     // 0 = x, 1 = y
  int bouncer;  // bouncer value involved
};

// Layers 1-3 (expansion, mode computation, duplication) act classically on the non-weak digits.
inline void expansion(StrongCell& x, StrongCell& y) {
  for (auto* c : {&x, &y})
    if (c->wall) c->counter = (c->counter + 1) % 3;
  auto swap_bundle = [&] {
    std::swap(x.counter, y.counter);
    std::swap(x.wall, y.wall);
    std::swap(x.copy, y.copy);
    std::swap(x.history, y.history);
  };
  if (x.wall && x.counter == 2 && !y.wall)
    swap_bundle();
  else if (y.wall && y.counter == 2 && !x.wall)
    swap_bundle();
  if (!x.wall && !y.wall) std::swap(x.bouncer, y.bouncer);
}

template <class Log>
void mode_computation(StrongCell& x, StrongCell& y, Log&& log) {
  if (!x.wall && y.wall == 2 && x.bouncer) {
    x.mode = (x.mode + x.bouncer - 1 + y.history) % 3;
    log(Event{Event::ModeComputation, 0, x.bouncer});
  }
  if (!y.wall && x.wall == 2 && y.bouncer) {
    y.mode = (y.mode + y.bouncer - 1 + x.history) % 3;
    log(Event{Event::ModeComputation, 1, y.bouncer});
  }
}

template <class Log>
void duplication(StrongCell& x, StrongCell& y, Log&& log) {
  if (x.wall == 1 && !y.wall && y.bouncer) {
    x.program = (x.program + x.copy) % 4;
    log(Event{Event::Fire, 0, y.bouncer});
    y.bouncer = inc3(y.bouncer);
  }
  if (y.wall == 1 && !x.wall && x.bouncer) {
    y.program = (y.program + y.copy) % 4;
    log(Event{Event::Fire, 1, x.bouncer});
    x.bouncer = inc3(x.bouncer);
  }
}

template <class Log>
void band_layers(StrongCell& x, StrongCell& y, Log&& log) {
  expansion(x, y);
  mode_computation(x, y, log);
  duplication(x, y, log);
}

inline void band_layers(StrongCell& x, StrongCell& y) {
  band_layers(x, y, [](const Event&) {});
}

// Fast rule: layers 1-3 classically, then the weak table on (data, program, mode).
class StrongRule : public PairRule {
 public:
  const Alphabet& alphabet() const override { return strong_alphabet(); }
  void apply(Cell cx, Cell cy, std::vector<PairOut>& out) const override {
    if (cx == 0 && cy == 0) {
      out.push_back({0, 0, 1.0});
      return;
    }
    auto x = StrongCell::unpack(cx), y = StrongCell::unpack(cy);
    band_layers(x, y);
    std::vector<PairOut> w;
    weak::rule().apply(x.weak_part().pack(), y.weak_part().pack(), w);
    for (auto& o : w) {
      auto wx = weak::WeakCell::unpack(o.x), wy = weak::WeakCell::unpack(o.y);
      StrongCell ox = x, oy = y;
      ox.data = wx.data, ox.program = wx.program, ox.mode = wx.mode;
      oy.data = wy.data, oy.program = wy.program, oy.mode = wy.mode;
      out.push_back({ox.pack(), oy.pack(), o.amp});
    }
  }
};

inline const StrongRule& rule() {
  static const StrongRule r;
  return r;
}

// Structural description: four layers of controlled gates on the 16 pair subsystems
// (x digits 0..7, y digits 8..15).
inline Mat swap_mat(int d) {
  Mat m(d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) m(b * d + a, a * d + b) = 1.0;
  return m;
}

inline Layer expansion_layer() {
  const int X = 0, Y = kArity;
  Layer l{"expansion", {}};
  // counter tick on wall cells
  for (int o : {X, Y}) l.gates.push_back(ControlledGate{"tick", {o + W}, {o + C}, {{{1}, weak::inc_mod(3)}, {{2}, weak::inc_mod(3)}}});
  // SC: a wall cell whose counter fires moves its bundle into a wall-free partner
  std::vector<int> bundle{X + C, X + W, X + CP, X + H, Y + C, Y + W, Y + CP, Y + H};
  l.gates.push_back(PermGate{"SC", bundle, [](Digits& d) {
                               const int X = 0, Y = kArity;
                               bool fx = d[X + W] && d[X + C] == 2 && !d[Y + W];
                               bool fy = d[Y + W] && d[Y + C] == 2 && !d[X + W];
                               if (fx || fy)
                                 for (int s : {C, W, CP, H}) std::swap(d[X + s], d[Y + s]);
                             }});
  l.gates.push_back(ControlledGate{"bouncer", {X + W, Y + W}, {X + B, Y + B}, {{{0, 0}, swap_mat(4)}}});
  return l;
}

inline Layer mode_layer() {
  const int X = 0, Y = kArity;
  Layer l{"mode-computation", {}};
  for (auto [self, other] : {std::pair{X, Y}, std::pair{Y, X}}) {
    ControlledGate g{"CM", {self + W, other + W, self + B, other + H}, {self + M}, {}};
    for (int b = 1; b < 4; ++b)
      for (int h = 0; h < 3; ++h) {
        Mat m = Mat::identity(3);
        for (int k = 0; k < (b - 1 + h) % 3; ++k) m = weak::inc_mod(3) * m;
        g.table[{0, 2, b, h}] = m;
      }
    l.gates.push_back(g);
  }
  return l;
}

inline Layer duplication_layer() {
  const int X = 0, Y = kArity;
  Layer l{"duplication", {}};
  for (auto [self, other] : {std::pair{X, Y}, std::pair{Y, X}}) {
    // program += copy and bouncer Inc3, both only when the bouncer is nonzero
    ControlledGate g{"CP", {self + W, other + W, self + CP}, {self + P, other + B}, {}};
    for (int cp = 0; cp < 4; ++cp) {
      Mat m(16);
      for (int p = 0; p < 4; ++p)
        for (int b = 0; b < 4; ++b) {
          int np = b ? (p + cp) % 4 : p;
          m(np * 4 + inc3(b), p * 4 + b) = 1.0;
        }
      g.table[{1, 0, cp}] = m;
    }
    l.gates.push_back(g);
  }
  return l;
}

inline Layer interaction_layer() {
  Layer l{"interaction", {}};
  for (auto& wl : weak::layers({D, P, M, kArity + D, kArity + P, kArity + M}))
    for (auto& g : wl.gates) l.gates.push_back(g);
  return l;
}

inline Structural structural() {
  std::vector<int> sizes = strong_alphabet().sizes;
  sizes.insert(sizes.end(), strong_alphabet().sizes.begin(), strong_alphabet().sizes.end());
  return {sizes, {expansion_layer(), mode_layer(), duplication_layer(), interaction_layer()}};
}

}  // namespace uqca::strong
