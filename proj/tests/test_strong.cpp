#include <doctest.h>

#include <random>

#include "uqca/strong.hpp"
#include "uqca/strong_compiler.hpp"
#include "uqca/verify.hpp"
#include "uqca/weak_compiler.hpp"

using namespace uqca;

namespace {

Circuit circ(int n, std::vector<PlacedGate> g) { return Circuit{n, std::move(g)}; }

SparseState small_superposition(int nq, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_state(sim_alphabet(), nq, 3, 0, rng, [](std::mt19937_64& g) { return (Cell)(1 + g() % 2); });
}

}  // namespace

TEST_CASE("strong layers certify and have orthonormal sampled columns") {
  auto s = strong::structural();
  REQUIRE(s.layers.size() == 4);
  for (auto& l : s.layers) {
    auto c = certify_layer(s.sizes, l);
    CHECK_MESSAGE(c.pass, c.witness);
    auto g = sampled_gram(s.sizes, l, 200, 11);
    CHECK_MESSAGE(g.pass, g.witness);
  }
}

TEST_CASE("fast strong rule agrees with the layered description") {
  StructuralRule slow(strong_alphabet(), strong::structural());
  std::mt19937_64 rng(5);
  auto same = [&](Cell x, Cell y) {
    std::vector<PairOut> a, b;
    strong::rule().apply(x, y, a);
    b = slow.compute(x, y);
    std::map<std::pair<Cell, Cell>, cplx> ma, mb;
    for (auto& o : a) ma[{o.x, o.y}] += o.amp;
    for (auto& o : b) mb[{o.x, o.y}] += o.amp;
    double m = 0;
    for (auto& [k, v] : ma) m = std::max(m, std::abs(v - mb[k]));
    for (auto& [k, v] : mb) m = std::max(m, std::abs(v - ma[k]));
    return m < 1e-14;
  };
  int bad = 0;
  for (int i = 0; i < 3000; ++i) bad += !same((Cell)(rng() % 15552), (Cell)(rng() % 15552));
  // pairs that occur on a real tape
  auto [st, L] = encode_strong(circ(1, {{Gate::H1, 0}}), sim_from_bitstring("0110"));
  auto& cells = st.terms.begin()->first.cells;
  for (std::size_t i = 0; i + 1 < cells.size(); ++i) bad += !same(cells[i], cells[i + 1]);
  CHECK(bad == 0);
}

TEST_CASE("SC moves a firing wall outward and leaves other pairs alone") {
  strong::StrongCell w{1, 0, 1, 2, 0, 0, 0, 1}, q{};
  auto x = w, y = q;
  strong::expansion(x, y);  // counter 1 -> 2 fires into the empty partner
  CHECK(x.wall == 0);
  CHECK(y.wall == 1);
  CHECK(y.copy == 2);
  CHECK(y.history == 1);
  CHECK(y.counter == 2);
  strong::StrongCell a{0, 0, 1, 0, 0, 0, 0, 0}, b{0, 0, 2, 0, 0, 0, 0, 0};
  strong::expansion(a, b);
  CHECK(a.wall == 1);
  CHECK(b.wall == 2);
}

TEST_CASE("Inc3 cycles 1->2->3->1 and fixes 0") {
  CHECK(strong::inc3(0) == 0);
  CHECK(strong::inc3(1) == 2);
  CHECK(strong::inc3(2) == 3);
  CHECK(strong::inc3(3) == 1);
}

TEST_CASE("strong tape agrees with the weak tape on the woven region") {
  std::vector<std::vector<PlacedGate>> circuits{{}, {{Gate::Swap, 0}}, {{Gate::H1, 0}}, {{Gate::CPhase, 0}},
                                                {{Gate::H2, 0}, {Gate::Swap, 0}},
                                                {{Gate::H1, 0}, {Gate::CPhase, 0}, {Gate::Swap, 0}}};
  for (auto& g : circuits) {
    Circuit c = circ(1, g);
    auto sim = small_superposition(6, 3);
    auto [ss, L] = encode_strong(c, sim);
    const long T = 3L * L.t;
    auto [ws, WL] = encode_weak(c, sim, false, 2 * T, true);
    double worst = 0;
    for (long t = 0; t <= T; ++t) {
      auto [a, b] = woven_region(ss.terms.begin()->first, L);
      worst = std::max(worst, projection_diff(weak_projection(ss, a, b), weak_projection(ws, a, b)));
      if (t == T) break;
      ss = step(ss, (int)(t % 2), strong::rule());
      ws = step(ws, (int)(t % 2), weak::rule());
    }
    CHECK_MESSAGE(worst < 1e-12, "circuit with ", g.size(), " gates");
  }
}

TEST_CASE("factored run matches the sparse engine on a strong tape") {
  Circuit c = circ(1, {{Gate::H1, 0}, {Gate::CPhase, 0}, {Gate::Swap, 0}});
  std::vector<Qubit> init{{1, 0}, {0, 1}, {0.6, 0.8}, {1, 0}};
  // dense product input for the sparse engine
  SparseState sim;
  sim.alpha = &sim_alphabet();
  auto psi = product_state(init);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    std::vector<Cell> w;
    for (int q = 3; q >= 0; --q) w.push_back((Cell)(((i >> q) & 1) + 1));
    if (psi[i] != 0.0) sim.add(Config{0, w}, psi[i]);
  }
  auto [ss, L] = encode_strong(c, sim);
  auto [bs, L2] = encode_strong(c, sim_from_bitstring("0000"));
  FactoredRun fr(strong::rule(), strong::D, bs.terms.begin()->first);
  for (int k = 1; k <= 2; ++k) {
    ss = evolve(ss, L.t, strong::rule(), (int)((long)(k - 1) * L.t % 2));
    fr.run(L.t);
    for (int q = 0; q + 1 < 4; ++q) {
      int a = fr.qubit_at(L.qubit_cell(q, k)), b = fr.qubit_at(L.qubit_cell(q + 1, k));
      if (a < 0 || b < 0) continue;
      Mat rf = cone_reduced_state(init, fr.log(), {a, b});
      // reduced state of the same two cells from the sparse run
      Mat rs(4);
      std::map<std::vector<Cell>, std::vector<std::pair<int, cplx>>> by_rest;
      for (auto& [cfg, amp] : ss.terms) {
        int da = strong::StrongCell::unpack(cfg.at(L.qubit_cell(q, k))).data;
        int db = strong::StrongCell::unpack(cfg.at(L.qubit_cell(q + 1, k))).data;
        auto rest = cfg.cells;
        rest[(std::size_t)(L.qubit_cell(q, k) - cfg.offset)] = 0;
        rest[(std::size_t)(L.qubit_cell(q + 1, k) - cfg.offset)] = 0;
        by_rest[rest].emplace_back((da - 1) * 2 + (db - 1), amp);
      }
      for (auto& [r, list] : by_rest)
        for (auto& [i, x] : list)
          for (auto& [j, y] : list) rs(i, j) += x * std::conj(y);
      CHECK(max_abs_diff(rf, rs) < 1e-12);
    }
  }
}

TEST_CASE("strong tapes keep the weak background over many macro-steps") {
  for (auto c : {circ(1, {{Gate::Swap, 0}}), circ(2, {{Gate::H2, 1}})}) {
    auto [st, L] = encode_strong(c, sim_from_bitstring(std::string((std::size_t)(4 * c.n), '0')));
    FactoredRun fr(strong::rule(), strong::D, st.terms.begin()->first);
    const int K = c.n == 1 ? 8 : 4;
    fr.run((long)K * L.t);
    auto sk = fr.skeleton();
    SparseState s = SparseState::basis(strong_alphabet(), sk);
    CHECK_NOTHROW(decode_strong(s, L, K, 0, 4 * c.n));
    auto [a, b] = woven_region(sk, L);
    auto [a0, b0] = woven_region(st.terms.begin()->first, L);
    CHECK((b - a) - (b0 - a0) == (std::int64_t)K * L.s);
  }
}
