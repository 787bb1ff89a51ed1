#pragma once
// Finite initial configurations for the strong machine: the encoded register surrounded by
// copy bands that keep weaving the weak background as it grows.

#include <climits>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <tuple>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "strong.hpp"
#include "weak_compiler.hpp"

namespace uqca {

inline std::int64_t pmod(std::int64_t a, std::int64_t m) { return ((a % m) + m) % m; }

namespace strong {

enum class Side { Right, Left };

// Band-only dynamics (walls, counters, bouncers) on a sparse tape. The weak digits do not
// influence these, so dry runs skip them.
struct DryRun {
  struct Hit {
    Event::Kind kind;
    std::int64_t pos;
    long t;
    int bouncer;
  };
  std::map<std::int64_t, StrongCell> cells;
  std::vector<Hit> hits;
  long t = 0;

  void step() {
    const int parity = (int)(t % 2);
    std::set<std::int64_t> starts;
    for (auto& [p, c] : cells) starts.insert(p - pmod(p - parity, 2));
    std::map<std::int64_t, StrongCell> next;
    for (auto a : starts) {
      auto get = [&](std::int64_t p) {
        auto it = cells.find(p);
        return it == cells.end() ? StrongCell{} : it->second;
      };
      StrongCell x = get(a), y = get(a + 1);
      band_layers(x, y, [&](const Event& e) { hits.push_back({e.kind, a + e.cell, t, e.bouncer}); });
      if (!(x == StrongCell{})) next[a] = x;
      if (!(y == StrongCell{})) next[a + 1] = y;
    }
    cells.swap(next);
    ++t;
  }
  std::vector<std::int64_t> positions(int StrongCell::*field) const {
    std::vector<std::int64_t> r;
    for (auto& [p, c] : cells)
      if (c.*field) r.push_back(p);
    return r;
  }
};

// A band of d interior cells between an inner wall (facing the register) and an outer wall.
inline std::vector<StrongCell> band_cells(int d, Side side, int ci, int co, int copy, int bp, int bval, int hist) {
  std::vector<StrongCell> mid((std::size_t)d);
  mid[(std::size_t)bp].bouncer = bval;
  StrongCell inner{ci, 0, 2, 0, 0, 0, 0, hist}, outer{co, 0, 1, copy, 0, 0, 0, 0};
  std::vector<StrongCell> r;
  r.push_back(side == Side::Right ? inner : outer);
  r.insert(r.end(), mid.begin(), mid.end());
  r.push_back(side == Side::Right ? outer : inner);
  return r;
}

struct BandEvents {
  std::vector<std::int64_t> fires;                      // light-line coordinate of each fired slot
  std::vector<std::pair<std::int64_t, int>> modes;      // (light-line coordinate, bouncer) per mode computation
  std::vector<std::int64_t> walls, bouncers;            // final positions
};

// Light-line coordinate: fired slots travel outward at speed 1, so u = pos + t on the right
// and pos - t on the left identifies the initial cell of the slot.
inline BandEvents dry_band(const std::vector<StrongCell>& cells, std::int64_t pos0, Side side, long T) {
  DryRun r;
  for (std::size_t q = 0; q < cells.size(); ++q)
    if (!(cells[q] == StrongCell{})) r.cells[pos0 + (std::int64_t)q] = cells[q];
  while (r.t < T) r.step();
  BandEvents e;
  for (auto& h : r.hits) {
    std::int64_t u = side == Side::Right ? h.pos + h.t : h.pos - h.t;
    if (h.kind == Event::Fire)
      e.fires.push_back(u);
    else
      e.modes.emplace_back(u, h.bouncer);
  }
  e.walls = r.positions(&StrongCell::wall);
  e.bouncers = r.positions(&StrongCell::bouncer);
  return e;
}

struct BandOption {
  int ci, co, bp;
  std::int64_t res, u0;  // residue of the fired stream mod P, first fired coordinate
};

}  // namespace strong

struct BandInfo {
  strong::Side side;
  int index;
  std::int64_t pos0;  // leftmost cell of the band
  int ci, co, bp, copy, history;
  std::int64_t residue;
};

struct StrongLayout {
  Circuit circuit;
  int s = 0, t = 0, P = 0, d = 0, r = 0, nb = 0, x = 0;
  std::int64_t origin = 1, JL = 0, JR = 0, lo = 0, hi = 0;
  long T = 0;  // dry-run horizon used by the compiler
  std::vector<BandInfo> bands;
  // formula radius for comparison: (d+3)(2mn+1) with d = round(s/3)
  int nominal_r() const {
    int dn = (int)std::lround(s / 3.0);
    return (dn + 3) * (2 * circuit.m() * circuit.n + 1);
  }
  std::int64_t width() const { return hi - lo; }
  std::int64_t data_start(int j) const { return origin + (std::int64_t)j * s + (s - 2 * circuit.n); }
  // tape cell holding logical qubit q after k macro-steps
  std::int64_t qubit_cell(std::int64_t q, int k) const {
    const int n = circuit.n;
    std::int64_t rel = q - (std::int64_t)k * n;
    std::int64_t j = (rel - pmod(rel, 2 * n)) / (2 * n);
    return data_start((int)j) + (std::int64_t)k * (s / 2) + pmod(rel, 2 * n);
  }
};

namespace strong {

// Options for one band at pos0: counter phases and bouncer start cell whose fired stream is
// steady with period P and whose walls move outward with the bouncer kept inside. Screened over
// a few fire periods; the compiler re-checks the chosen bands over its full horizon.
inline std::vector<BandOption> band_options(int d, Side side, std::int64_t pos0, int P) {
  const long T = 4L * P + 3L * (d + 2);
  // dynamics commute with even translations, so run at pos0 mod 2 and translate
  static std::map<std::tuple<int, int, int, int>, std::vector<std::pair<BandOption, BandEvents>>> cache;
  const int base = (int)pmod(pos0, 2);
  const std::int64_t shift = pos0 - base;
  auto key = std::make_tuple(d, (int)side, base, P);
  auto it = cache.find(key);
  if (it == cache.end()) {
    std::vector<std::pair<BandOption, BandEvents>> all;
    for (int ci = 0; ci < 3; ++ci)
      for (int co = 0; co < 3; ++co)
        for (int bp = 0; bp < d; ++bp) {
          auto e = dry_band(band_cells(d, side, ci, co, 0, bp, 1, 0), base, side, T);
          all.push_back({BandOption{ci, co, bp, 0, 0}, e});
        }
    it = cache.emplace(key, std::move(all)).first;
  }
  std::vector<BandOption> out;
  for (auto& [o, e0] : it->second) {
    if (e0.walls.size() != 2 || e0.bouncers.size() != 1) continue;
    std::int64_t w0 = e0.walls[0] + shift, w1 = e0.walls[1] + shift, b = e0.bouncers[0] + shift;
    if (!(w0 < b && b < w1)) continue;
    if (side == Side::Right && w0 < pos0 + T / 3 - 3) continue;
    if (side == Side::Left && w1 > pos0 + d + 1 - T / 3 + 3) continue;
    if (e0.fires.size() < 3) continue;
    bool steady = true;
    for (std::size_t i = 1; i < e0.fires.size(); ++i)
      if (e0.fires[i] - e0.fires[i - 1] != (side == Side::Right ? P : -P)) steady = false;
    if (!steady) continue;
    BandOption r = o;
    r.u0 = e0.fires[0] + shift;
    r.res = pmod(r.u0, P);
    out.push_back(r);
  }
  return out;
}

}  // namespace strong

namespace detail {
// Background tape (data zones empty) for the strong encoding of x supercells, with bands.
inline std::pair<std::vector<strong::StrongCell>, StrongLayout> strong_background(const Circuit& c, int x) {
  using namespace strong;
  c.validate();
  if (x < 1) throw std::invalid_argument("strong encoding needs at least one supercell");
  StrongLayout L;
  L.circuit = c;
  auto f = expansion_factors(c);
  L.s = f.s;
  L.t = f.t;
  L.x = x;
  const int s = L.s;
  // period of the fired stream: a band fires on slots 4k apart, and each fire advances its mode
  // offset by one, so P/s must be 1 mod 3
  L.P = s % 4 == 0 ? s : 4 * s;
  const int P = L.P;
  int d = (int)std::lround(P / 3.0);
  if (d % 4 == 1) d = 3 * d < P ? d + 1 : d - 1;
  L.d = d;
  L.nb = P / 2;
  L.r = (d + 3) * L.nb;
  L.JL = L.origin;
  L.JR = L.origin + (std::int64_t)s * x;
  L.lo = L.JL - L.r;
  L.hi = L.JR + L.r;
  // events move outward at 4/3 cells per step, so every in-tape event and the first few outside
  // it happen before T
  L.T = 3L * L.r / 4 + 6L * P + 3L * (d + 2);
  auto per = weak::supercell(c);
  for (int i = s - 2 * c.n; i < s; ++i) per[(std::size_t)i].data = 0;
  std::map<int, std::int64_t> cc_res;  // parity -> residue mod s of the change-colour slot
  for (int j = 0; j < s; ++j)
    if (per[(std::size_t)j].program == 1) cc_res[(int)pmod(L.origin + j, 2)] = pmod(L.origin + j, s);
  std::vector<StrongCell> tape((std::size_t)(L.hi - L.lo));
  for (std::int64_t i = L.lo; i < L.hi; ++i) {
    auto w = per[(std::size_t)pmod(i - L.origin, s)];
    tape[(std::size_t)(i - L.lo)] = StrongCell{0, 0, 0, 0, 0, w.program, w.mode, 0};
  }
  auto inside = [&](std::int64_t u) { return L.lo <= u && u < L.hi; };
  auto at = [&](std::int64_t u) -> StrongCell& { return tape[(std::size_t)(u - L.lo)]; };

  for (Side side : {Side::Right, Side::Left}) {
    const int par = side == Side::Right ? 1 : 0;  // right-side fired slots are left-movers
    std::map<std::int64_t, weak::WeakCell> kind;
    for (int j = 0; j < P; ++j)
      if (pmod(L.origin + j, 2) == par) kind[pmod(L.origin + j, P)] = per[(std::size_t)(j % s)];
    std::vector<std::int64_t> pos;
    for (int k = 0; k < L.nb; ++k)
      pos.push_back(side == Side::Right ? L.JR + (std::int64_t)k * (d + 3) + 1 : L.JL - (std::int64_t)(k + 1) * (d + 3));
    std::vector<std::vector<BandOption>> opts;
    for (auto p : pos) opts.push_back(band_options(d, side, p, P));
    // the first fired slot must not leave an unfired slot of its residue between it and the tape edge
    auto edge_ok = [&](std::int64_t res, std::int64_t u0) {
      if (side == Side::Right) {
        std::int64_t u = L.hi + pmod(res - L.hi, P);
        return u0 <= u;
      }
      std::int64_t u = L.lo - 1 - pmod(L.lo - 1 - res, P);
      return u0 >= u;
    };
    std::vector<BandOption> chosen;
    std::set<std::int64_t> used;
    std::function<bool(int)> assign = [&](int k) {
      if (k == L.nb) return true;
      for (auto& o : opts[(std::size_t)k]) {
        if (!kind.count(o.res) || used.count(o.res) || !edge_ok(o.res, o.u0)) continue;
        used.insert(o.res);
        chosen.push_back(o);
        if (assign(k + 1)) return true;
        chosen.pop_back();
        used.erase(o.res);
      }
      return false;
    };
    if (!assign(0)) throw std::runtime_error(std::string("no copy-band plan for the ") +
                                             (side == Side::Right ? "right" : "left") + " side");
    const std::int64_t v0 = side == Side::Right ? cc_res.at(0) : cc_res.at(1);
    // change-colour slots a fired slot at u would have crossed had the background extended to it
    auto crossings = [&](std::int64_t u) {
      std::int64_t a, b;  // half-open range of light-line coordinates
      if (side == Side::Right)
        a = L.hi, b = u;
      else
        a = u + 1, b = L.lo;
      if (b <= a) return (std::int64_t)0;
      // number of v < z with v = v0 mod s, up to a common constant
      auto upto = [&](std::int64_t z) { return (z - v0 + pmod(v0 - z, s)) / s; };
      return upto(b) - upto(a);
    };
    for (int k = 0; k < L.nb; ++k) {
      auto o = chosen[(std::size_t)k];
      const int copy = kind.at(o.res).program;
      auto ev = dry_band(band_cells(d, side, o.ci, o.co, copy, o.bp, 1, 0), pos[(std::size_t)k], side, L.T);
      for (std::size_t i = 1; i < ev.fires.size(); ++i)
        if (ev.fires[i] - ev.fires[i - 1] != (side == Side::Right ? P : -P))
          throw std::runtime_error("copy band stream loses its period");
      int hist = -1;
      for (auto& [u, b] : ev.modes)
        if (pmod(u, P) == o.res && !inside(u)) {
          int need = (int)pmod(kind.at(o.res).mode + crossings(u), 3);
          hist = (int)pmod(need - (b - 1), 3);
          break;
        }
      if (hist < 0) throw std::runtime_error("copy band never computes a mode outside the tape");
      for (auto& [u, b] : ev.modes) {
        int off = (b - 1 + hist) % 3;
        if (inside(u)) {
          auto& c = at(u);
          c.mode = (int)pmod(c.mode - off, 3);
        } else if (off != pmod(kind.at(pmod(u, P)).mode + crossings(u), 3)) {
          throw std::runtime_error("copy band mode offsets inconsistent");
        }
      }
      for (auto u : ev.fires)
        if (inside(u)) {
          auto& c = at(u);
          c.program = (int)pmod(c.program - copy, 4);
        }
      auto cells = band_cells(d, side, o.ci, o.co, copy, o.bp, 1, hist);
      for (std::size_t q = 0; q < cells.size(); ++q) {
        auto& c = at(pos[(std::size_t)k] + (std::int64_t)q);
        int p = c.program, m = c.mode;
        c = cells[q];
        c.program = p;
        c.mode = m;
      }
      L.bands.push_back(BandInfo{side, k, pos[(std::size_t)k], o.ci, o.co, o.bp, copy, hist, o.res});
    }
  }
  return {tape, L};
}
}  // namespace detail

// Strong encoding of a 2n*x-qubit register: x supercells of weak tape flanked by copy bands.
inline std::pair<SparseState, StrongLayout> encode_strong(const Circuit& c, const SparseState& sim) {
  int nq = detail::qubit_count(sim);
  if (nq <= 0 || nq % (2 * c.n)) throw std::invalid_argument("input width must be a positive multiple of 2n");
  auto [bg, L] = detail::strong_background(c, nq / (2 * c.n));
  SparseState out;
  out.alpha = &strong_alphabet();
  for (auto& [cfg, amp] : sim.terms) {
    auto cells = bg;
    for (int q = 0; q < nq; ++q) cells[(std::size_t)(L.qubit_cell(q, 0) - L.lo)].data = cfg.cells[(std::size_t)q];
    std::vector<Cell> w;
    for (auto& sc : cells) w.push_back(sc.pack());
    out.add(canonicalize(L.lo, std::move(w)), amp);
  }
  return {out, L};
}

// Walls of a classical strong configuration.
inline std::vector<std::int64_t> wall_positions(const Config& c) {
  std::vector<std::int64_t> r;
  for (std::int64_t i = c.offset; i < c.end(); ++i)
    if (strong::StrongCell::unpack(c.at(i)).wall) r.push_back(i);
  return r;
}

// The woven region: strictly between the innermost inner walls on either side of the register.
inline std::pair<std::int64_t, std::int64_t> woven_region(const Config& c, const StrongLayout& L) {
  std::int64_t mid = (L.JL + L.JR) / 2, li = INT64_MIN, ri = INT64_MAX;
  for (auto w : wall_positions(c)) {
    if (strong::StrongCell::unpack(c.at(w)).wall != 2) continue;
    if (w < mid) li = std::max(li, w);
    if (w > mid) ri = std::min(ri, w);
  }
  if (li == INT64_MIN || ri == INT64_MAX) throw std::runtime_error("register lost its copy bands");
  return {li + 1, ri};
}

// Reads logical qubits [qlo, qhi) after k macro-steps; the woven background must match the
// weak periodic background, and absent data reads as the quiescent digit.
inline SparseState decode_strong(const SparseState& st, const StrongLayout& L, int k, std::int64_t qlo,
                                 std::int64_t qhi) {
  WeakLayout wl;
  wl.circuit = L.circuit;
  wl.s = L.s;
  wl.t = L.t;
  wl.origin = L.origin;
  auto bg = weak::background_after(wl, (long)k * L.t);
  SparseState out;
  out.alpha = &sim_alphabet();
  for (auto& [cfg, amp] : st.terms) {
    auto [a, b] = woven_region(cfg, L);
    for (std::int64_t i = a; i < b; ++i) {
      auto c = strong::StrongCell::unpack(cfg.at(i));
      auto e = bg[(std::size_t)pmod(i, L.s)];
      if (c.program != e.first || c.mode != e.second)
        throw std::runtime_error("woven background mismatch at cell " + std::to_string(i));
    }
    std::vector<Cell> q;
    for (std::int64_t j = qlo; j < qhi; ++j) {
      std::int64_t cell = L.qubit_cell(j, k);
      if (cell < a || cell >= b) throw std::runtime_error("qubit outside the woven region");
      q.push_back((Cell)strong::StrongCell::unpack(cfg.at(cell)).data);
    }
    out.add(Config{qlo, std::move(q)}, amp);
  }
  return out;
}

}  // namespace uqca
