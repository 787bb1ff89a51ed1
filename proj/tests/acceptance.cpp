// End-to-end acceptance run: one PASS/FAIL line per criterion.
// Criteria listed in the known-failures file (first argument) may fail without failing the run.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "uqca/demos.hpp"
#include "uqca/gates.hpp"
#include "uqca/strong.hpp"
#include "uqca/strong_compiler.hpp"
#include "uqca/verify.hpp"
#include "uqca/weak.hpp"
#include "uqca/weak_compiler.hpp"

using namespace uqca;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Line {
  int id;
  bool pass;
  std::string detail;
};

// Single-gate circuits at every position for n = 1, 2, then the 3-gate circuit.
std::vector<Circuit> single_gate_circuits() {
  std::vector<Circuit> cs;
  for (int n = 1; n <= 2; ++n)
    for (Gate g : {Gate::Swap, Gate::H2, Gate::H1, Gate::CPhase})
      for (int p = -(n - 1); p <= n - 1; ++p) cs.push_back(Circuit{n, {{g, p}}});
  return cs;
}

Circuit three_gate_circuit() { return Circuit{2, {{Gate::H1, -1}, {Gate::CPhase, 1}, {Gate::Swap, 0}}}; }

std::string circuit_text(const Circuit& c) {
  std::string s = "n=" + std::to_string(c.n);
  for (auto& g : c.gates) s += fmt(" %s@%d", gate_name(g.gate), g.pos);
  return s;
}

std::string random_bits(int nq, std::mt19937_64& rng) {
  std::string b;
  for (int i = 0; i < nq; ++i) b += (char)('0' + rng() % 2);
  return b;
}

SparseState superposed(int nq, std::mt19937_64& rng) {
  return random_state(sim_alphabet(), nq, 4, 0, rng, [](std::mt19937_64& g) { return (Cell)(1 + g() % 2); });
}

Line unitarity_weak() {
  auto t0 = Clock::now();
  auto u = weak::dense();
  auto r = weak::check_unitary_sparse(u);
  std::vector<PairOut> q;
  weak::rule().apply(0, 0, q);
  bool quiescent = q.size() == 1 && q[0].x == 0 && q[0].y == 0 && q[0].amp == cplx(1.0);
  double sec = seconds_since(t0);
  return {1, r.pass && r.max_dev <= 1e-12 && quiescent && sec < 5,
          fmt("weak %dx%d max|U'U-I| %.2g, quiescent column %s, %.2fs", u.n, u.n, r.max_dev,
              quiescent ? "exact" : "wrong", sec)};
}

Line unitarity_strong() {
  auto t0 = Clock::now();
  auto s = strong::structural();
  bool ok = s.layers.size() == 4;
  double worst = 0;
  for (std::size_t i = 0; i < s.layers.size(); ++i) {
    auto c = certify_layer(s.sizes, s.layers[i]);
    auto g = sampled_gram(s.sizes, s.layers[i], 1000, 100 + i);
    ok = ok && c.pass && g.pass;
    worst = std::max({worst, c.max_dev, g.max_dev});
  }
  double sec = seconds_since(t0);
  return {2, ok && sec < 30,
          fmt("%zu strong layers certified, 1000 sampled Gram columns each, max dev %.2g, %.2fs", s.layers.size(),
              worst, sec)};
}

Line axioms() {
  bool ok = true;
  std::string d;
  for (auto [name, u] : {std::pair<const char*, const PairRule*>{"weak", &weak::rule()}, {"strong", &strong::rule()}}) {
    auto si = check_shift_invariance(*u, 100, 7);
    auto ca = check_causality(*u, 200, 8);
    ok = ok && si.pass && ca.pass;
    d += fmt("%s shift %.2g causality %.2g; ", name, si.max_dev, ca.max_dev);
  }
  return {3, ok, d + "100 states, 200 trials"};
}

Line gate_identities() {
  double dc = max_abs_diff(product(derived_cnot()), cnot());
  auto cp = native_gate(Gate::CPhase);
  double anc = 0;
  for (auto& c : phase_via_ancilla_cases())
    for (int r = 0; r < 4; ++r) {
      cplx v = 0;
      for (int k = 0; k < 4; ++k) v += cp(r, k) * c.in[(std::size_t)k];
      anc = std::max(anc, std::abs(v - c.expected[(std::size_t)r]));
    }
  return {4, dc <= 1e-12 && anc <= 1e-12, fmt("(I(x)H) cPhase^8 (I(x)H) vs cNot %.2g, ancilla phase %.2g", dc, anc)};
}

Line weak_single_gates() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(5);
  double worst = 0;
  int runs = 0;
  std::string bad;
  for (auto& c : single_gate_circuits()) {
    const int nq = 4 * c.n;
    std::vector<SparseState> inputs;
    for (int i = 0; i < 3; ++i) inputs.push_back(sim_from_bitstring(random_bits(nq, rng)));
    inputs.push_back(superposed(nq, rng));
    for (auto& in : inputs) {
      auto r = weak_ring_fidelity(c, in, 1);
      worst = std::max(worst, r.eps);
      ++runs;
      if (!r.pass && bad.empty()) bad = ", first failure " + circuit_text(c);
    }
  }
  double sec = seconds_since(t0);
  return {5, worst <= 1e-9 && sec < 120, fmt("%d runs, worst 1-F %.2g, %.2fs", runs, worst, sec) + bad};
}

Line weak_three_gates() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(6);
  auto c = three_gate_circuit();
  const int nq = 4 * c.n;
  double worst = 0;
  std::vector<SparseState> inputs;
  for (int i = 0; i < 3; ++i) inputs.push_back(sim_from_bitstring(random_bits(nq, rng)));
  inputs.push_back(superposed(nq, rng));
  for (auto& in : inputs) worst = std::max(worst, weak_ring_fidelity(c, in, 3).eps);
  double sec = seconds_since(t0);
  return {6, worst <= 1e-9 && sec < 300,
          fmt("%s, 4 inputs, 3 macro-steps, worst 1-F %.2g, %.2fs", circuit_text(c).c_str(), worst, sec)};
}

// Fidelity, finiteness and background growth hold or not; the tape-size formula is reported separately.
Line strong_runs() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(9);
  auto cs = single_gate_circuits();
  cs.push_back(three_gate_circuit());
  double worst = 0;
  bool finite = true, growth = true, tracked = true, size_ok = true;
  int runs = 0;
  std::string size_note, bad;
  for (auto& c : cs) {
    const int nq = 4 * c.n;
    std::vector<std::vector<Qubit>> inputs;
    for (int i = 0; i < 3; ++i) inputs.push_back(basis_qubits(random_bits(nq, rng)));
    std::vector<Qubit> mix;
    for (int i = 0; i < nq; ++i) mix.push_back(random_qubit(rng));
    inputs.push_back(mix);
    for (auto& in : inputs) {
      auto r = strong_window_fidelity(c, in, 3);
      ++runs;
      worst = std::max(worst, r.fid.eps);
      tracked = tracked && r.tracked && r.background;
      const auto& L = r.layout;
      // realized tape against s*x + 2r with the formula radius
      std::int64_t want = (std::int64_t)L.s * L.x + 2 * (std::int64_t)r.nominal_r;
      if (r.width != want) {
        size_ok = false;
        if (size_note.empty())
          size_note = fmt("; tape size %lld vs formula %lld (r %d vs %d) for %s", (long long)r.width, (long long)want,
                          r.r, r.nominal_r, circuit_text(c).c_str());
      }
      for (std::size_t k = 1; k < r.woven.size(); ++k) {
        if (r.woven[k] - r.woven[k - 1] != L.s) growth = false;  // s/2 per side per 3s/2 steps
        if (r.extent[k] - r.extent[k - 1] > 2L * L.t) finite = false;
      }
      if (r.fid.eps > 1e-9 && bad.empty()) bad = ", first fidelity failure " + circuit_text(c);
    }
  }
  double sec = seconds_since(t0);
  bool ok = worst <= 1e-9 && finite && growth && tracked && size_ok && sec < 600;
  return {7, ok,
          fmt("%d runs, worst 1-F %.2g, finite %s, background grows 1 cell per 3 steps %s, tape size %s, %.1fs", runs,
              worst, finite ? "yes" : "no", growth ? "yes" : "no", size_ok ? "matches" : "differs", sec) +
              size_note + bad};
}

Line demos() {
  bool ok = true;
  std::string d;
  for (auto& name : demo::names()) {
    auto a = demo::run(name), b = demo::run(name);
    bool stable = a.ppm() == b.ppm();
    int fails = 0;
    for (auto& c : a.checks) fails += !c.pass;
    ok = ok && stable && a.pass();
    d += fmt("%s %zu checks%s%s; ", name.c_str(), a.checks.size(), fails ? " FAILED" : "", stable ? "" : " unstable");
    if (name == "fig-copyband") {
      long fire = a.measured.at("fire_period"), s = a.measured.at("s");
      ok = ok && fire == s / 2;
      d += fmt("copy-band fire period %ld vs s/2 = %ld; ", fire, s / 2);
    }
  }
  return {8, ok && demo::names().size() == 6, d};
}

Line strong_vs_weak() {
  std::mt19937_64 rng(11);
  std::vector<std::vector<PlacedGate>> gs{
      {}, {{Gate::Swap, 0}}, {{Gate::H1, 0}}, {{Gate::H2, 0}}, {{Gate::CPhase, 0}}, {{Gate::H1, 0}, {Gate::CPhase, 0}, {Gate::Swap, 0}}};
  double worst = 0;
  long periods = 0;
  for (auto& g : gs) {
    Circuit c{1, g};
    auto sim = superposed(6, rng);
    auto [ss, L] = encode_strong(c, sim);
    const long T = 3L * L.t;
    auto [ws, WL] = encode_weak(c, sim, false, 2 * T, true);
    for (long t = 0; t <= T; ++t) {
      auto [a, b] = woven_region(ss.terms.begin()->first, L);
      worst = std::max(worst, projection_diff(weak_projection(ss, a, b), weak_projection(ws, a, b)));
      if (t == T) break;
      ss = step(ss, (int)(t % 2), strong::rule());
      ws = step(ws, (int)(t % 2), weak::rule());
    }
    periods = T / L.t;
  }
  return {9, worst == 0 && periods >= 3,
          fmt("%zu circuits at n=m<=1, %ld macro-periods each, max amplitude difference %.2g", gs.size(), periods, worst)};
}

std::map<int, std::string> read_known(const char* path) {
  std::map<int, std::string> k;
  if (!path) return k;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    int id;
    if (ls >> id) {
      std::string why;
      std::getline(ls >> std::ws, why);
      k[id] = why;
    }
  }
  return k;
}

}  // namespace

int main(int argc, char** argv) {
  auto known = read_known(argc > 1 ? argv[1] : nullptr);
  int unexpected = 0;
  for (auto run : {unitarity_weak, unitarity_strong, axioms, gate_identities, weak_single_gates, weak_three_gates,
                   strong_runs, demos, strong_vs_weak}) {
    auto l = run();
    auto it = known.find(l.id);
    std::string tag = l.pass ? "PASS" : "FAIL";
    if (!l.pass && it != known.end()) tag += " (known: " + it->second + ")";
    if (!l.pass && it == known.end()) ++unexpected;
    std::printf("criterion %d %s: %s\n", l.id, tag.c_str(), l.detail.c_str());
    std::fflush(stdout);
  }
  return unexpected ? 1 : 0;
}
