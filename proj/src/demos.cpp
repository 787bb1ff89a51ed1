#include "uqca/demos.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "uqca/strong_compiler.hpp"
#include "uqca/weak.hpp"
#include "uqca/weak_compiler.hpp"

namespace uqca::demo {
namespace {

constexpr int kScale = 2;

using io::Rgb;
namespace col = io::colours;

// Reads cell colours back from a rendered image.
struct Pixels {
  const io::Image& im;
  std::int64_t x0, x1;
  int rows;
  bool ring;
  Pixels(const io::Image& i, const io::Grid& g, bool r)
      : im(i), x0(g.x0), x1(g.x1), rows((int)g.rows.size()), ring(r) {}
  Rgb at(std::int64_t x, int k) const {
    if (ring) x = x0 + pmod(x - x0, x1 - x0);
    return im.at((int)(x - x0) * kScale, im.h - (k + 1) * kScale);
  }
  std::vector<std::int64_t> find(int k, const Rgb& c) const {
    std::vector<std::int64_t> r;
    for (auto x = x0; x < x1; ++x)
      if (at(x, k) == c) r.push_back(x);
    return r;
  }
  bool is_data(std::int64_t x, int k) const {
    auto c = at(x, k);
    return c == col::white || c == col::black;
  }
};

std::string str(std::int64_t v) { return std::to_string(v); }

Result finish(const std::string& name, const io::Grid& g, const std::function<Rgb(Cell)>& colour) {
  Result r;
  r.name = name;
  r.image = io::render(g, colour, kScale);
  r.image.comments.insert(r.image.comments.begin(), "uqca " + name);
  return r;
}

bool is_bouncer(const Rgb& c) {
  return std::find(std::begin(col::bouncer), std::end(col::bouncer), c) != std::end(col::bouncer);
}

// Maximal runs of data pixels on a ring row, as (start, length).
std::vector<std::pair<std::int64_t, int>> data_runs(const Pixels& px, int k) {
  const std::int64_t N = px.x1 - px.x0;
  std::int64_t start = -1;
  for (std::int64_t x = 0; x < N; ++x)
    if (!px.is_data(px.x0 + x, k)) {
      start = x;
      break;
    }
  std::vector<std::pair<std::int64_t, int>> runs;
  if (start < 0) return {{px.x0, (int)N}};
  int len = 0;
  std::int64_t rs = 0;
  for (std::int64_t i = 1; i <= N; ++i) {
    std::int64_t x = px.x0 + pmod(start + i, N);
    if (px.is_data(x, k)) {
      if (!len) rs = x;
      ++len;
    } else if (len) {
      runs.emplace_back(rs, len);
      len = 0;
    }
  }
  return runs;
}

std::vector<Cell> background_ring(const Circuit& c, int x) {
  auto sc = weak::supercell(c);
  std::vector<Cell> w;
  for (int r = 0; r < x; ++r)
    for (auto& cell : sc) w.push_back(cell.pack());
  return w;
}

// ---- fig-ternary: data-free weak background on a ring

Result ternary() {
  Circuit c{1, {{Gate::Swap, 0}, {Gate::CPhase, 0}}};
  const int s = (int)weak::supercell(c).size(), x = 4;
  auto st = SparseState::basis(weak_alphabet(), Config{0, background_ring(c, x)}, true);
  Trajectory tr;
  evolve(st, 6L * s, weak::rule(), 0, &tr);
  auto g = io::grid_of(tr, 0, (std::int64_t)s * x);
  auto r = finish("fig-ternary", g, io::colouring("ternary", weak_alphabet()));
  Pixels px(r.image, g, true);

  std::set<std::tuple<int, int, int>> greys;
  bool diag = true;
  std::size_t blacks = px.find(0, col::black).size();
  bool constant = blacks > 0;
  for (int k = 0; k < px.rows; ++k) {
    auto b = px.find(k, col::black);
    if (b.size() != blacks) constant = false;
    for (auto xx = px.x0; xx < px.x1; ++xx) {
      auto cc = px.at(xx, k);
      if (cc == col::light || cc == col::middle || cc == col::dark) greys.insert({cc.r, cc.g, cc.b});
    }
    if (k + 1 < px.rows)
      for (auto xb : b)
        if (!(px.at(xb - 1, k + 1) == col::black) && !(px.at(xb + 1, k + 1) == col::black)) diag = false;
  }
  r.checks.push_back({"three grey levels", greys.size() == 3, str((std::int64_t)greys.size()) + " greys"});
  r.checks.push_back({"black change-colour signals move diagonally", diag, ""});
  r.checks.push_back({"black signal count constant", constant, str((std::int64_t)blacks) + " per row"});

  // the first recurrence of the bottom row, up to a shift, and the colour cycle of every column
  int period = -1;
  std::int64_t shift = 0;
  const std::int64_t N = px.x1 - px.x0;
  for (int k = 1; k < px.rows && period < 0; ++k)
    for (std::int64_t sh = 0; sh < N && period < 0; ++sh) {
      bool eq = true;
      for (std::int64_t xx = 0; xx < N && eq; ++xx) eq = px.at(xx + sh, k) == px.at(xx, 0);
      if (eq) period = k, shift = sh;
    }
  const int t = 3 * s / 2;
  r.checks.push_back({"pattern recurs shifted by half a supercell every 3s/2 steps",
                      period == t && (shift == s / 2 || shift == N - s / 2),
                      "period " + str(period) + " steps, shift " + str(shift) + " cells, s = " + str(s)});
  bool cycle = px.rows > 3 * t;
  for (std::int64_t xx = 0; xx < N && cycle; ++xx) {
    std::set<int> seen;
    for (int k = 0; k <= 3 * t; ++k) {
      auto cc = px.at(xx, k);
      if (cc == col::light) seen.insert(0);
      if (cc == col::middle) seen.insert(1);
      if (cc == col::dark) seen.insert(2);
    }
    if (seen.size() != 3) cycle = false;
  }
  r.checks.push_back({"every cell cycles through the three greys", cycle, ""});
  return r;
}

// ---- fig-dataflow: data blocks split and regroup in the background

Result dataflow() {
  Circuit c{3, {}};
  const std::string bits = "011010110100111001";
  auto [st, L] = encode_weak(c, sim_from_bitstring(bits, true), true);
  Trajectory tr;
  const int K = 3;
  evolve(st, (long)K * L.t, weak::rule(), 0, &tr);
  const std::int64_t N = L.ring_length();
  auto g = io::grid_of(tr, 0, N);
  auto r = finish("fig-dataflow", g, io::colouring("dataflow", weak_alphabet()));
  Pixels px(r.image, g, true);

  bool conserved = true;
  for (int k = 0; k < px.rows; ++k) {
    int cnt = 0;
    for (auto xx = px.x0; xx < px.x1; ++xx) cnt += px.is_data(xx, k);
    if (cnt != (int)bits.size()) conserved = false;
  }
  r.checks.push_back({"data count conserved", conserved, str((std::int64_t)bits.size()) + " data cells"});

  const int n = c.n, x = L.count;
  bool blocks = true, values = true;
  std::ostringstream why;
  for (int k = 0; k <= K; ++k) {
    int row = k * L.t;
    auto runs = data_runs(px, row);
    std::set<std::int64_t> want;
    for (int j = 0; j < x; ++j) want.insert(pmod(L.data_start(j) + (std::int64_t)k * L.s / 2, N));
    std::set<std::int64_t> got;
    for (auto [a, len] : runs) {
      if (len != 2 * n) blocks = false;
      got.insert(a);
    }
    if (got != want) blocks = false, why << "macro-step " << k << " blocks misplaced; ";
    // the identity circuit moves qubit q to block cell q + k*n
    for (int q = 0; q < (int)bits.size(); ++q) {
      int qq = (int)pmod(q - (std::int64_t)k * n, (std::int64_t)bits.size());
      std::int64_t cell = L.data_start(qq / (2 * n)) + (std::int64_t)k * L.s / 2 + qq % (2 * n);
      Rgb want_c = bits[(std::size_t)q] == '0' ? col::white : col::black;
      if (!(px.at(cell, row) == want_c)) values = false;
    }
  }
  r.checks.push_back({"stationary blocks of 2n at every macro-step", blocks, why.str()});
  r.checks.push_back({"qubits arrive n cells along per macro-step", values, ""});
  int max_runs = 0;
  for (int k = 0; k < px.rows; ++k) max_runs = std::max(max_runs, (int)data_runs(px, k).size());
  r.checks.push_back({"blocks split and regroup in between", max_runs > x,
                      "up to " + str(max_runs) + " runs for " + str(x) + " blocks"});
  return r;
}

// ---- fig-circuitry: program halves collide on data and apply the M gate

Result circuitry() {
  Circuit c{2, {{Gate::CPhase, 0}, {Gate::Swap, 1}, {Gate::Swap, -1}, {Gate::CPhase, 1}}};
  const std::string bits = "01101100";
  auto [st, L] = encode_weak(c, sim_from_bitstring(bits, true), true);
  Trajectory tr;
  const int K = 2;
  evolve(st, (long)K * L.t, weak::rule(), 0, &tr);
  const std::int64_t N = L.ring_length();
  auto g = io::grid_of(tr, 0, N);
  auto r = finish("fig-circuitry", g, io::colouring("circuitry", weak_alphabet()));
  Pixels px(r.image, g, true);

  // collision sites come from the cell grid (programs under data are not drawn), the effect is
  // read from the data pixels
  int collisions = 0, swaps = 0, phases = 0;
  bool effect = true;
  for (int k = 0; k + 1 < px.rows; ++k) {
    const int parity = k % 2;
    for (std::int64_t a = parity; a + 1 < N + parity; a += 2) {
      auto cx = weak::WeakCell::unpack(g.at(pmod(a, N), (std::size_t)k));
      auto cy = weak::WeakCell::unpack(g.at(pmod(a + 1, N), (std::size_t)k));
      if (!cx.data || !cy.data || cx.program < 2 || cy.program < 2) continue;
      ++collisions;
      Rgb bx = px.at(a, k), by = px.at(a + 1, k), ax = px.at(a, k + 1), ay = px.at(a + 1, k + 1);
      if (cx.program == 2 && cy.program == 2) {
        ++swaps;
        if (!(ax == by && ay == bx)) effect = false;
      } else if (cx.program == 3 && cy.program == 3) {
        ++phases;
        if (!(ax == bx && ay == by)) effect = false;
      } else {
        effect = false;  // this circuit has no Hadamards
      }
    }
  }
  const int expect = c.m() * L.count * K;
  r.checks.push_back({"one collision per gate per block per macro-step", collisions == expect,
                      str(collisions) + " collisions, expected " + str(expect)});
  r.checks.push_back({"collisions apply the M gate to the data pixels", effect && swaps > 0 && phases > 0,
                      str(swaps) + " swaps, " + str(phases) + " controlled phases"});
  int halves = 0;
  for (auto xx = px.x0; xx < px.x1; ++xx) halves += px.at(xx, 0) == col::half2 || px.at(xx, 0) == col::half3;
  r.checks.push_back({"program halves drawn", halves == 2 * c.m() * L.count, str(halves) + " at step 0"});
  return r;
}

// ---- copy bands

Circuit band_circuit() { return Circuit{1, {{Gate::Swap, 0}, {Gate::CPhase, 0}, {Gate::H1, 0}}}; }

Result copyband() {
  using namespace strong;
  auto [bg, L] = detail::strong_background(band_circuit(), 1);
  const int P = L.P, d = L.d;
  auto opts = band_options(d, Side::Right, 0, P);
  if (opts.empty()) throw std::runtime_error("no copy-band option");
  auto o = opts.front();
  auto cells = band_cells(d, Side::Right, o.ci, o.co, 1, o.bp, 1, 0);
  std::vector<Cell> w;
  for (auto& cc : cells) w.push_back(cc.pack());
  const long steps = 5L * P;
  auto st = SparseState::basis(strong_alphabet(), Config{0, w});
  Trajectory tr;
  evolve(st, steps, strong::rule(), 0, &tr);
  auto g = io::grid_of(tr, -steps - 2, d + 4 + steps / 3 + 2);
  auto r = finish("fig-copyband", g, [](Cell v) { return io::strong_colour(v); });
  Pixels px(r.image, g, false);

  bool walls = true, speed = true, inside = true, single = true;
  std::vector<std::int64_t> bpos;
  std::int64_t outer0 = 0;
  for (int k = 0; k < px.rows; ++k) {
    auto wo = px.find(k, col::wall_outer), wi = px.find(k, col::wall_inner);
    if (wo.size() != 1 || wi.size() != 1 || wi[0] >= wo[0]) {
      walls = false;
      continue;
    }
    if (k == 0) outer0 = wo[0];
    if (std::abs((wo[0] - outer0) * 3 - k) > 3) speed = false;
    std::vector<std::int64_t> b;
    for (auto xx = px.x0; xx < px.x1; ++xx)
      if (is_bouncer(px.at(xx, k))) b.push_back(xx);
    if (b.size() != 1) {
      single = false;
      continue;
    }
    if (!(wi[0] < b[0] && b[0] < wo[0])) inside = false;
    bpos.push_back(b[0]);
  }
  r.checks.push_back({"two walls", walls, ""});
  r.checks.push_back({"walls advance one cell per three steps", speed, ""});
  int turns = 0;
  std::int64_t dir = 0;
  for (std::size_t k = 1; k < bpos.size(); ++k) {
    std::int64_t m = bpos[k] - bpos[k - 1];
    if (m * dir < 0) ++turns;
    if (m) dir = m;
  }
  r.checks.push_back({"bouncer zigzags between the walls", single && inside && turns >= 4,
                      str(turns) + " reflections"});

  // fired change-colour signals: signal pixels on left-moving diagonals x + k = u
  std::map<std::int64_t, int> first;
  for (int k = 0; k < px.rows; ++k)
    for (auto xx : px.find(k, col::signal)) first.emplace(xx + k, k);
  std::vector<std::int64_t> us;
  std::vector<int> births;
  for (auto& [u, k] : first) us.push_back(u), births.push_back(k);
  std::sort(births.begin(), births.end());
  bool lines = true;
  for (int k = 0; k < px.rows; ++k)
    for (auto xx : px.find(k, col::signal))
      for (int j = k + 1; j < px.rows && xx - (j - k) > px.x0; ++j) {
        auto cc = px.at(xx - (j - k), j);
        if (!(cc == col::signal) && !(cc == col::wall_inner) && !(cc == col::wall_outer) && !is_bouncer(cc))
          lines = false;
      }
  bool spacing = us.size() >= 4, period = births.size() >= 4;
  for (std::size_t i = 1; i < us.size(); ++i) spacing = spacing && us[i] - us[i - 1] == P;
  for (std::size_t i = 2; i < births.size(); ++i) period = period && births[i] - births[i - 1] == births[1] - births[0];
  const int fire = births.size() >= 2 ? births[1] - births[0] : -1;
  r.checks.push_back({"fired diagonals are straight and P apart", lines && spacing,
                      str((std::int64_t)us.size()) + " diagonals, P = " + str(P)});
  r.checks.push_back({"periodic fires", period && fire == 3 * P / 4,
                      "fire period " + str(fire) + " steps (3P/4 with P = " + str(P) + ", s = " + str(L.s) + ")"});
  r.measured = {{"fire_period", fire}, {"P", P}, {"s", L.s}};
  return r;
}

Result gates() {
  using namespace strong;
  auto [bg, L] = detail::strong_background(band_circuit(), 1);
  const int P = L.P, d = L.d;
  const std::int64_t gap = 4L * P;
  // a left band firing rightwards and a right band firing leftwards, facing each other
  auto ol = band_options(d, Side::Left, 0, P), orr = band_options(d, Side::Right, d + 2 + gap, P);
  if (ol.empty() || orr.empty()) throw std::runtime_error("no copy-band option");
  auto a = band_cells(d, Side::Left, ol[0].ci, ol[0].co, 3, ol[0].bp, 1, 0);
  auto b = band_cells(d, Side::Right, orr[0].ci, orr[0].co, 2, orr[0].bp, 1, 0);
  std::vector<Cell> w;
  for (auto& cc : a) w.push_back(cc.pack());
  for (std::int64_t i = 0; i < gap; ++i) w.push_back(0);
  for (auto& cc : b) w.push_back(cc.pack());
  const long steps = 8L * P;
  auto st = SparseState::basis(strong_alphabet(), Config{0, w});
  Trajectory tr;
  evolve(st, steps, strong::rule(), 0, &tr);
  auto g = io::grid_of(tr, -steps / 3 - 2, (std::int64_t)w.size() + steps / 3 + 2);
  auto r = finish("fig-gates", g, [](Cell v) { return io::strong_colour(v); });
  Pixels px(r.image, g, false);

  // diagonals in the gap: half3 moving right (x - k), half2 moving left (x + k)
  // the gap lies strictly between the two inner walls
  std::vector<std::pair<std::int64_t, std::int64_t>> gap_at;
  bool walls = true;
  for (int k = 0; k < px.rows; ++k) {
    auto wi = px.find(k, col::wall_inner);
    if (wi.size() != 2) walls = false, wi = {0, 0};
    gap_at.emplace_back(wi[0], wi[1]);
  }
  auto in_gap = [&](std::int64_t xx, std::int64_t k) {
    return k >= 0 && k < px.rows && gap_at[(std::size_t)k].first < xx && xx < gap_at[(std::size_t)k].second;
  };
  std::set<std::int64_t> right_movers, left_movers;
  bool clean = walls;
  for (int k = 0; k < px.rows; ++k)
    for (std::int64_t xx = gap_at[(std::size_t)k].first + 1; xx < gap_at[(std::size_t)k].second; ++xx) {
      auto cc = px.at(xx, k);
      if (cc == col::half3)
        right_movers.insert(xx - k);
      else if (cc == col::half2)
        left_movers.insert(xx + k);
    }
  // every diagonal stays intact across the gap rows it spans
  for (auto u : right_movers)
    for (int k = 0; k < px.rows; ++k) {
      std::int64_t xx = u + k;
      if (!in_gap(xx, k)) continue;
      auto cc = px.at(xx, k);
      if (!(cc == col::half3) && !(cc == col::signal)) clean = false;
    }
  for (auto u : left_movers)
    for (int k = 0; k < px.rows; ++k) {
      std::int64_t xx = u - k;
      if (!in_gap(xx, k)) continue;
      auto cc = px.at(xx, k);
      if (!(cc == col::half2) && !(cc == col::signal)) clean = false;
    }
  // crossings: x - k = a and x + k = b meet at k = (b - a) / 2, rounded up for a half-step
  int crossings = 0;
  for (auto ua : right_movers)
    for (auto ub : left_movers) {
      std::int64_t k = (ub - ua + 1) / 2, xx = ua + k;
      if (in_gap(xx, k)) ++crossings;
    }
  r.checks.push_back({"both bands fire into the gap", right_movers.size() >= 3 && left_movers.size() >= 3,
                      str((std::int64_t)right_movers.size()) + " right-moving, " +
                          str((std::int64_t)left_movers.size()) + " left-moving"});
  r.checks.push_back({"duplicated programs cross unchanged", clean, ""});
  r.checks.push_back({"at least seven crossings", crossings >= 7, str(crossings) + " crossings"});
  return r;
}

// ---- fig-seeded: a full strong tape

Result seeded() {
  Circuit c{1, {{Gate::Swap, 0}}};
  auto [st, L] = encode_strong(c, sim_from_bitstring("0110"));
  const int K = 3;
  Trajectory tr;
  evolve(st, (long)K * L.t, strong::rule(), 0, &tr);
  auto [x0, x1] = io::extent(tr);
  auto g = io::grid_of(tr, x0, x1);
  auto r = finish("fig-seeded", g, [](Cell v) { return io::strong_colour(v); });
  Pixels px(r.image, g, false);

  bool enclosed = true, conserved = true;
  std::int64_t w0 = 0, wk = 0;
  for (int k = 0; k < px.rows; ++k) {
    std::vector<std::int64_t> data;
    for (auto xx = px.x0; xx < px.x1; ++xx)
      if (px.is_data(xx, k)) data.push_back(xx);
    if (data.size() != 4) {
      conserved = false;
      continue;
    }
    std::int64_t li = INT64_MIN, ri = INT64_MAX;
    for (auto xx : px.find(k, col::wall_inner)) {
      if (xx < data.front()) li = std::max(li, xx);
      if (xx > data.back()) ri = std::min(ri, xx);
    }
    if (li == INT64_MIN || ri == INT64_MAX) enclosed = false;
    if (k == 0) w0 = ri - li;
    if (k == px.rows - 1) wk = ri - li;
  }
  r.checks.push_back({"data count conserved", conserved, ""});
  r.checks.push_back({"data enclosed by inner walls", enclosed, ""});
  const long steps = (long)K * L.t;
  r.checks.push_back({"woven region widens by 2 cells per 3 steps", wk - w0 == 2 * steps / 3,
                      "width " + str(w0) + " -> " + str(wk) + " over " + str(steps) + " steps"});
  std::int64_t lo0 = px.x1, hi0 = px.x0, lok = px.x1, hik = px.x0;
  for (auto xx = px.x0; xx < px.x1; ++xx) {
    if (!(px.at(xx, 0) == col::quiescent)) lo0 = std::min(lo0, xx), hi0 = std::max(hi0, xx);
    if (!(px.at(xx, px.rows - 1) == col::quiescent)) lok = std::min(lok, xx), hik = std::max(hik, xx);
  }
  r.checks.push_back({"tape stays finite", lo0 - lok <= steps && hik - hi0 <= steps,
                      "extent [" + str(lo0) + "," + str(hi0) + "] -> [" + str(lok) + "," + str(hik) + "]"});
  return r;
}

}  // namespace

const std::vector<std::string>& names() {
  static const std::vector<std::string> n{"fig-ternary", "fig-dataflow", "fig-circuitry",
                                          "fig-copyband", "fig-gates",   "fig-seeded"};
  return n;
}

Result run(const std::string& name) {
  if (name == "fig-ternary") return ternary();
  if (name == "fig-dataflow") return dataflow();
  if (name == "fig-circuitry") return circuitry();
  if (name == "fig-copyband") return copyband();
  if (name == "fig-gates") return gates();
  if (name == "fig-seeded") return seeded();
  throw std::invalid_argument("unknown demo " + name);
}

}  // namespace uqca::demo
