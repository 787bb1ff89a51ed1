#include <doctest.h>

#include <random>

#include "uqca/verify.hpp"
#include "uqca/weak.hpp"
#include "uqca/weak_compiler.hpp"

using namespace uqca;

TEST_CASE("weak rule is unitary and fixes the quiescent pair") {
  auto u = weak::dense();
  auto r = weak::check_unitary_sparse(u);
  CHECK(r.pass);
  CHECK(u(0, 0) == cplx(1.0));
}

TEST_CASE("weak ring run matches the direct simulation") {
  for (int n : {1, 2}) {
    for (auto gates : std::vector<std::vector<PlacedGate>>{{}, {{Gate::H1, 0}}, {{Gate::CPhase, 0}, {Gate::Swap, 0}}}) {
      if (n == 2) for (auto& g : gates) g.pos = 1 - g.pos % 2;
      Circuit c{n, gates};
      std::mt19937_64 rng(7);
      auto sim = random_state(sim_alphabet(), 4 * n, 3, 0, rng, [](std::mt19937_64& g) { return (Cell)(1 + g() % 2); });
      sim.ring = true;
      auto [st, L] = encode_weak(c, sim, true, 0);
      DirectPqca oracle(c);
      auto expect = sim;
      for (int k = 0; k < 3; ++k) {
        st = evolve(st, L.t, weak::rule(), (int)((long)k * L.t % 2));
        expect = oracle.step(expect, k);
        auto got = decode_weak(st, L, k + 1, (k + 1) * L.t);
        CHECK(fidelity(got.first, expect) > 1 - 1e-9);
      }
    }
  }
}

TEST_CASE("single-shot tape applies the derived cNot") {
  Circuit c{1, {}};
  for (Gate g : derived_cnot()) c.gates.push_back({g, 0});
  auto cn = cnot();
  for (int in = 0; in < 4; ++in) {
    auto sim = sim_basis({in >> 1, in & 1});
    auto [st, L] = encode_circuit_once(c, sim);
    st = evolve(st, L.steps, weak::rule(), 0);
    auto got = decode_once(st, L);
    for (int out = 0; out < 4; ++out) {
      auto it = got.terms.find(canonicalize(0, {(Cell)((out >> 1) + 1), (Cell)((out & 1) + 1)}));
      cplx a = it == got.terms.end() ? cplx(0) : it->second;
      CHECK(std::abs(a - cn(out, in)) < 1e-12);
    }
  }
}

TEST_CASE("two-layer rule is a unitary, shift-invariant, causal QCA") {
  auto h = hadamard();
  TwoLayerRule r(kron(h, h), native_gate(Gate::CPhase));
  CHECK(check_unitary(r.dense()).pass);
  CHECK(check_shift_invariance(r, 40, 3).pass);
  CHECK(check_causality(r, 80, 4).pass);
}

TEST_CASE("padded weak tape decodes its window") {
  Circuit c{1, {{Gate::H1, 0}, {Gate::Swap, 0}}};
  auto sim = sim_from_bitstring("0110");
  DirectPqca oracle(c);
  auto [st, L] = encode_weak(c, sim, false, 2L * 9);
  st = evolve(st, 2L * L.t, weak::rule(), 0);
  auto expect = oracle.step(oracle.step(sim_from_bitstring("0110", true), 0), 1);
  auto got = decode_weak(st, L, 2, 2L * L.t);
  CHECK(got.second.deficit < 1e-12);
  CHECK(got.first.terms.size() == expect.terms.size());
}
