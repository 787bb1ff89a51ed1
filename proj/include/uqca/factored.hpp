#pragma once
// Data-factored evolution: when a rule moves data cells and acts on their values without the
// rest of the tape ever depending on those values, the tape evolves classically and the data
// values only see a log of two-qubit gates. The run checks this property pair by pair and
// throws when it fails.

#include <array>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "core.hpp"
#include "gates.hpp"

namespace uqca {

using Gate4 = std::array<cplx, 16>;  // row-major, index 2*left+right on both sides

struct GateEvent {
  long time;
  int a, b;  // qubit in the left cell, qubit in the right cell
  Gate4 g;
};

class FactoredRun {
 public:
  // cfg is a basis configuration whose data digits (1 or 2) mark qubit cells; qubits are numbered
  // 0,1,... left to right.
  FactoredRun(const PairRule& u, int data_sub, const Config& cfg, int first_parity = 0)
      : u_(u), al_(u.alphabet()), sub_(data_sub), parity0_(first_parity) {
    offset_ = cfg.offset;
    for (Cell c : cfg.cells) {
      bool present = al_.digit(c, sub_) != 0;
      cells_.push_back(set_data(c, present ? 1 : 0));
      ids_.push_back(present ? nq_++ : -1);
    }
  }

  int qubits() const { return nq_; }
  long time() const { return t_; }
  const std::vector<GateEvent>& log() const { return log_; }
  Config skeleton() const { return Config{offset_, cells_}; }

  // qubit sitting at an absolute cell, or -1
  int qubit_at(std::int64_t pos) const {
    if (pos < offset_ || pos >= offset_ + (std::int64_t)cells_.size()) return -1;
    return ids_[(std::size_t)(pos - offset_)];
  }

  void step() {
    const int parity = (int)((t_ + parity0_) % 2);
    // two quiescent cells of margin on each side, aligned to the pairing
    std::int64_t lo = offset_ - 2, hi = offset_ + (std::int64_t)cells_.size() + 2;
    if (((lo - parity) % 2 + 2) % 2) --lo;
    if ((hi - lo) % 2) ++hi;
    std::vector<Cell> c((std::size_t)(hi - lo), 0);
    std::vector<int> id((std::size_t)(hi - lo), -1);
    std::copy(cells_.begin(), cells_.end(), c.begin() + (offset_ - lo));
    std::copy(ids_.begin(), ids_.end(), id.begin() + (offset_ - lo));
    for (std::size_t i = 0; i + 1 < c.size(); i += 2) {
      if (!c[i] && !c[i + 1]) continue;
      const auto& tr = transition(c[i], c[i + 1]);
      int ix = id[i], iy = id[i + 1];
      c[i] = tr.x;
      c[i + 1] = tr.y;
      if (ix >= 0 && iy >= 0) {
        if (!tr.identity) log_.push_back({t_, ix, iy, tr.g});
      } else if (ix >= 0 || iy >= 0) {
        int q = ix >= 0 ? ix : iy;
        id[i] = tr.lone_to_right ? -1 : q;
        id[i + 1] = tr.lone_to_right ? q : -1;
      }
    }
    std::size_t a = 0, b = c.size();
    while (a < b && !c[a]) ++a;
    while (b > a && !c[b - 1]) --b;
    offset_ = lo + (std::int64_t)a;
    cells_.assign(c.begin() + a, c.begin() + b);
    ids_.assign(id.begin() + a, id.begin() + b);
    ++t_;
  }

  void run(long steps) {
    for (long i = 0; i < steps; ++i) step();
  }

 private:
  struct Transition {
    Cell x = 0, y = 0;
    bool lone_to_right = false;
    bool identity = true;
    Gate4 g{};
  };

  Cell set_data(Cell c, int v) const {
    auto d = al_.unpack(c);
    d[(std::size_t)sub_] = v;
    return al_.pack(d);
  }

  [[noreturn]] void fail(Cell x, Cell y, const char* what) const {
    throw std::logic_error(std::string("rule is not data-factored (") + what + ") on pair " + std::to_string(x) +
                           "," + std::to_string(y));
  }

  const Transition& transition(Cell x, Cell y) {
    std::uint64_t key = (std::uint64_t)x << 16 | y;
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    Transition tr;
    bool px = al_.digit(x, sub_) != 0, py = al_.digit(y, sub_) != 0;
    std::vector<PairOut> outs;
    bool first = true;
    auto same_skeleton = [&](const PairOut& o) {
      Cell sx = set_data(o.x, al_.digit(o.x, sub_) ? 1 : 0), sy = set_data(o.y, al_.digit(o.y, sub_) ? 1 : 0);
      if (first) {
        tr.x = sx, tr.y = sy, first = false;
        return true;
      }
      return sx == tr.x && sy == tr.y;
    };
    if (px && py) {
      for (int a = 1; a <= 2; ++a)
        for (int b = 1; b <= 2; ++b) {
          outs.clear();
          u_.apply(set_data(x, a), set_data(y, b), outs);
          for (auto& o : outs) {
            int ox = al_.digit(o.x, sub_), oy = al_.digit(o.y, sub_);
            if (!ox || !oy) fail(x, y, "data count");
            if (!same_skeleton(o)) fail(x, y, "background depends on data");
            tr.g[(std::size_t)(((ox - 1) * 2 + (oy - 1)) * 4 + (a - 1) * 2 + (b - 1))] += o.amp;
          }
        }
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
          if (std::abs(tr.g[(std::size_t)(r * 4 + c)] - (r == c ? 1.0 : 0.0)) > 1e-15) tr.identity = false;
    } else if (px || py) {
      for (int v = 1; v <= 2; ++v) {
        outs.clear();
        u_.apply(px ? set_data(x, v) : x, py ? set_data(y, v) : y, outs);
        if (outs.size() != 1 || std::abs(outs[0].amp - 1.0) > 1e-12) fail(x, y, "lone datum branches");
        int ox = al_.digit(outs[0].x, sub_), oy = al_.digit(outs[0].y, sub_);
        if ((ox != 0) == (oy != 0) || (ox ? ox : oy) != v) fail(x, y, "lone datum changed");
        bool right = oy != 0;
        if (v == 2 && right != tr.lone_to_right) fail(x, y, "lone datum route depends on its value");
        tr.lone_to_right = right;
        if (!same_skeleton(outs[0])) fail(x, y, "background depends on data");
      }
    } else {
      u_.apply(x, y, outs);
      if (outs.size() != 1 || std::abs(outs[0].amp - 1.0) > 1e-12) fail(x, y, "background branches");
      if (al_.digit(outs[0].x, sub_) || al_.digit(outs[0].y, sub_)) fail(x, y, "data created");
      tr.x = outs[0].x, tr.y = outs[0].y;
    }
    return memo_.emplace(key, tr).first->second;
  }

  const PairRule& u_;
  const Alphabet& al_;
  int sub_;
  int parity0_;
  std::int64_t offset_ = 0;
  std::vector<Cell> cells_;
  std::vector<int> ids_;
  int nq_ = 0;
  long t_ = 0;
  std::vector<GateEvent> log_;
  std::unordered_map<std::uint64_t, Transition> memo_;
};

using Qubit = std::array<cplx, 2>;

// Dense register helpers; qubit 0 is the most significant bit.
inline void apply_gate4(std::vector<cplx>& psi, int nq, int a, int b, const Gate4& g) {
  const std::size_t ma = (std::size_t)1 << (nq - 1 - a), mb = (std::size_t)1 << (nq - 1 - b);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (i & (ma | mb)) continue;
    std::size_t idx[4] = {i, i | mb, i | ma, i | ma | mb};
    cplx in[4] = {psi[idx[0]], psi[idx[1]], psi[idx[2]], psi[idx[3]]};
    for (int r = 0; r < 4; ++r) {
      cplx acc = 0;
      for (int c = 0; c < 4; ++c) acc += g[(std::size_t)(r * 4 + c)] * in[c];
      psi[idx[r]] = acc;
    }
  }
}

inline Gate4 to_gate4(const Mat& m) {
  Gate4 g{};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) g[(std::size_t)(r * 4 + c)] = m(r, c);
  return g;
}

inline std::vector<cplx> product_state(const std::vector<Qubit>& qs) {
  std::vector<cplx> psi{1.0};
  for (auto& q : qs) {
    std::vector<cplx> next(psi.size() * 2);
    for (std::size_t i = 0; i < psi.size(); ++i) {
      next[2 * i] = psi[i] * q[0];
      next[2 * i + 1] = psi[i] * q[1];
    }
    psi.swap(next);
  }
  return psi;
}

// Reduced density matrix of `window` (in that order) for a product input, simulating only the
// gates in the window's backward light cone.
inline Mat cone_reduced_state(const std::vector<Qubit>& init, const std::vector<GateEvent>& events,
                              const std::vector<int>& window, int max_qubits = 24) {
  std::set<int> cone(window.begin(), window.end());
  std::vector<const GateEvent*> kept;
  for (auto it = events.rbegin(); it != events.rend(); ++it)
    if (cone.count(it->a) || cone.count(it->b)) {
      cone.insert(it->a);
      cone.insert(it->b);
      kept.push_back(&*it);
    }
  if ((int)cone.size() > max_qubits) throw std::runtime_error("light cone too wide: " + std::to_string(cone.size()));
  std::map<int, int> local;
  std::vector<Qubit> qs;
  for (int q : cone) {
    if (q < 0 || q >= (int)init.size()) throw std::out_of_range("qubit outside the register");
    local[q] = (int)qs.size();
    qs.push_back(init[(std::size_t)q]);
  }
  const int nq = (int)qs.size();
  auto psi = product_state(qs);
  for (auto it = kept.rbegin(); it != kept.rend(); ++it) apply_gate4(psi, nq, local[(*it)->a], local[(*it)->b], (*it)->g);
  const int w = (int)window.size();
  Mat rho(1 << w);
  std::vector<int> shifts;
  for (int q : window) shifts.push_back(nq - 1 - local[q]);
  std::size_t wmask = 0;
  for (int s : shifts) wmask |= (std::size_t)1 << s;
  std::vector<std::size_t> pat((std::size_t)1 << w, 0);
  for (int wi = 0; wi < (1 << w); ++wi)
    for (int k = 0; k < w; ++k)
      if ((wi >> (w - 1 - k)) & 1) pat[(std::size_t)wi] |= (std::size_t)1 << shifts[(std::size_t)k];
  std::vector<cplx> amps((std::size_t)1 << w);
  for (std::size_t base = 0; base < psi.size(); ++base) {
    if (base & wmask) continue;
    for (std::size_t wi = 0; wi < amps.size(); ++wi) amps[wi] = psi[base | pat[wi]];
    for (std::size_t i = 0; i < amps.size(); ++i)
      if (amps[i] != 0.0)
        for (std::size_t j = 0; j < amps.size(); ++j) rho((int)i, (int)j) += amps[i] * std::conj(amps[j]);
  }
  return rho;
}

}  // namespace uqca
