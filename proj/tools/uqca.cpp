// uqca: encode circuits into universal QCA tapes, run them, decode, verify and draw.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>

#include "uqca/demos.hpp"
#include "uqca/io.hpp"
#include "uqca/strong.hpp"
#include "uqca/strong_compiler.hpp"
#include "uqca/verify.hpp"
#include "uqca/weak.hpp"
#include "uqca/weak_compiler.hpp"

using namespace uqca;

namespace {

Circuit load_circuit(const std::string& path) {
  try {
    return io::parse_circuit(io::read_file(path));
  } catch (const io::ParseError& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

io::StateFile load_state(const std::string& path) {
  try {
    return io::parse_state(io::read_file(path));
  } catch (const io::ParseError& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

// A bitstring, or the path of a state file over the sim alphabet.
SparseState load_input(const std::string& arg) {
  if (std::filesystem::exists(arg)) {
    auto f = load_state(arg);
    if (!(*f.state.alpha == sim_alphabet())) throw std::runtime_error(arg + ": input must use the sim alphabet");
    return f.state;
  }
  return sim_from_bitstring(arg);
}

const PairRule& rule_for(const Alphabet& a) {
  if (a == weak_alphabet()) return weak::rule();
  if (a == strong_alphabet()) return strong::rule();
  throw std::runtime_error("no machine runs on alphabet " + a.name);
}

int encode(const std::string& flavour, const std::string& circ, const std::string& input, long horizon, bool ring,
           const std::string& out, std::string layout_out) {
  auto c = load_circuit(circ);
  auto sim = load_input(input);
  io::LayoutFile lf{flavour, c, detail::qubit_count(sim), ring, horizon};
  SparseState st;
  if (flavour == "weak") {
    if (!ring && horizon == 0) std::cerr << "warning: horizon 0, edge effects reach the register at once\n";
    st = encode_weak(c, sim, ring, horizon).first;
  } else if (flavour == "strong") {
    st = encode_strong(c, sim).first;
  } else {
    st = encode_circuit_once(c, sim).first;
  }
  io::write_file(out, io::serialize_state({st, 0}));
  if (layout_out.empty()) layout_out = out + ".layout";
  io::write_file(layout_out, io::serialize_layout(lf));
  std::cout << "wrote " << out << " (" << st.terms.size() << " terms) and " << layout_out << "\n";
  return 0;
}

int run(const std::string& conf, long steps, const std::string& record, const std::string& out) {
  auto f = load_state(conf);
  const PairRule& u = rule_for(*f.state.alpha);
  Trajectory tr;
  auto st = evolve(f.state, steps, u, (int)(f.step % 2), record.empty() ? nullptr : &tr);
  if (!record.empty()) io::write_file(record, io::serialize_trajectory(tr, f.step));
  io::write_file(out, io::serialize_state({st, f.step + steps}));
  std::cout << "step " << f.step + steps << ", " << st.terms.size() << " terms, norm^2 " << st.norm2() << "\n";
  return 0;
}

int decode(const std::string& layout, const std::string& state, const std::string& out) {
  std::ifstream lin(layout);
  if (!lin) throw std::runtime_error("cannot read " + layout);
  auto lf = io::parse_layout(lin);
  auto f = load_state(state);
  auto zeros = sim_basis(std::vector<int>((std::size_t)lf.qubits, 0));
  SparseState sim;
  if (lf.flavour == "weak") {
    auto L = encode_weak(lf.circuit, zeros, lf.ring, lf.horizon).second;
    if (f.step % L.t) throw std::runtime_error("state is not at a whole macro-step (t = " + std::to_string(L.t) + ")");
    auto [s, rep] = decode_weak(f.state, L, (int)(f.step / L.t), f.step);
    if (rep.deficit > 1e-10) std::cerr << "warning: background mismatch, weight " << rep.deficit << "\n";
    sim = s;
  } else if (lf.flavour == "strong") {
    auto L = encode_strong(lf.circuit, zeros).second;
    if (f.step % L.t) throw std::runtime_error("state is not at a whole macro-step (t = " + std::to_string(L.t) + ")");
    // a finite register spreads at its edges, so read a wider window and trim the empty cells
    const int k = (int)(f.step / L.t), w = lf.circuit.n * k;
    auto wide = decode_strong(f.state, L, k, -w, lf.qubits + w);
    sim.alpha = &sim_alphabet();
    for (auto& [cfg, amp] : wide.terms) sim.add(canonicalize(cfg.offset, cfg.cells), amp);
  } else {
    auto L = encode_circuit_once(lf.circuit, zeros).second;
    if (f.step < L.steps) std::cerr << "warning: only " << f.step << " of " << L.steps << " steps taken\n";
    sim = decode_once(f.state, L);
  }
  io::write_file(out, io::serialize_state({sim, 0}));
  std::cout << "decoded " << sim.terms.size() << " terms, norm^2 " << sim.norm2() << "\n";
  return 0;
}

int verify_unitary(const std::string& machine, int samples, std::uint64_t seed) {
  bool ok = true;
  if (machine == "weak") {
    auto u = weak::dense();
    auto r = weak::check_unitary_sparse(u);
    std::vector<PairOut> q;
    weak::rule().apply(0, 0, q);
    bool quiescent = q.size() == 1 && q[0].x == 0 && q[0].y == 0 && q[0].amp == cplx(1.0);
    std::printf("weak 1296x1296: max|U'U-I| = %.3g, quiescent column %s\n", r.max_dev, quiescent ? "exact" : "wrong");
    ok = r.pass && quiescent;
  } else {
    auto s = strong::structural();
    for (auto& l : s.layers) {
      auto c = certify_layer(s.sizes, l);
      auto g = sampled_gram(s.sizes, l, samples, seed);
      std::printf("%-16s certificate %s, %d sampled columns max dev %.3g%s%s\n", l.name.c_str(),
                  c.pass ? "ok" : "FAILED", samples, g.max_dev, c.witness.empty() ? "" : " ", c.witness.c_str());
      ok = ok && c.pass && g.pass;
    }
  }
  std::puts(ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}

int verify_axioms(const std::string& machine, int trials, std::uint64_t seed) {
  const PairRule& u = machine == "weak" ? (const PairRule&)weak::rule() : (const PairRule&)strong::rule();
  auto si = check_shift_invariance(u, trials, seed);
  auto ca = check_causality(u, 2 * trials, seed + 1);
  std::printf("shift invariance: %d states, max dev %.3g\ncausality: %d trials, max dev %.3g\n", si.trials, si.max_dev,
              ca.trials, ca.max_dev);
  bool ok = si.pass && ca.pass;
  std::puts(ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}

int verify_simulate(const std::string& circ, const std::string& input, const std::string& flavour, int K) {
  auto c = load_circuit(circ);
  FidelityReport r;
  if (flavour == "weak") {
    auto sim = load_input(input);
    r = weak_ring_fidelity(c, sim, K);
  } else {
    if (std::filesystem::exists(input)) throw std::runtime_error("strong simulation takes a bitstring input");
    auto rep = strong_window_fidelity(c, basis_qubits(input), K);
    std::printf("register %d qubits, tape %lld cells, woven width", rep.qubits, (long long)rep.width);
    for (auto w : rep.woven) std::printf(" %lld", (long long)w);
    std::printf("\n");
    if (!rep.tracked) std::puts("qubits were not where the layout puts them");
    if (!rep.background) std::puts("woven background differs from the weak background");
    r = rep.fid;
  }
  for (std::size_t k = 0; k < r.fidelities.size(); ++k) std::printf("macro-step %zu: fidelity %.15f\n", k + 1, r.fidelities[k]);
  std::puts(r.pass ? "PASS" : "FAIL");
  return r.pass ? 0 : 1;
}

int run_demo(const std::string& name, const std::string& out) {
  auto r = demo::run(name);
  io::write_file(out, r.ppm());
  for (auto& c : r.checks) std::printf("%s %s%s%s\n", c.pass ? "ok  " : "FAIL", c.what.c_str(), c.detail.empty() ? "" : ": ", c.detail.c_str());
  return r.pass() ? 0 : 1;
}

int render(const std::string& traj, const std::string& legend, const std::string& out, int scale) {
  std::ifstream in(traj);
  if (!in) throw std::runtime_error("cannot read " + traj);
  auto tr = io::parse_trajectory(in);
  if (tr.snaps.empty()) throw std::runtime_error(traj + ": empty trajectory");
  const auto& al = *tr.snaps[0].alpha;
  std::int64_t x0, x1;
  if (tr.snaps[0].ring) {
    x0 = 0, x1 = (std::int64_t)tr.snaps[0].terms.begin()->first.cells.size();
  } else {
    std::tie(x0, x1) = io::extent(tr);
  }
  auto g = io::grid_of(tr, x0, x1);
  auto im = io::render(g, io::colouring(legend, al), scale);
  io::write_file(out, io::to_ppm(im));
  if (g.residual > 0) std::printf("superposed snapshots: residual weight up to %.3g\n", g.residual);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Universal partitioned QCA: weak and strong encodings of quantum circuits"};
  app.require_subcommand(1);
  int code = 0;

  auto* enc = app.add_subcommand("encode", "Encode a circuit and an input register into a tape");
  std::string flavour = "weak", circ, input, out, layout;
  long horizon = 0;
  bool ring = false;
  enc->add_option("--flavour", flavour)->check(CLI::IsMember({"weak", "strong", "once"}));
  enc->add_option("--circuit", circ)->required();
  enc->add_option("--input", input, "bitstring or sim state file")->required();
  enc->add_option("--horizon", horizon, "weak padding horizon in steps");
  enc->add_flag("--ring", ring, "weak: cyclic tape");
  enc->add_option("-o", out)->required();
  enc->add_option("--layout", layout, "layout output (default <o>.layout)");
  enc->callback([&] { code = encode(flavour, circ, input, horizon, ring, out, layout); });

  auto* rn = app.add_subcommand("run", "Evolve a configuration or state file");
  std::string conf, record;
  long steps = 0;
  rn->add_option("--conf", conf)->required();
  rn->add_option("--steps", steps)->required()->check(CLI::NonNegativeNumber);
  rn->add_option("--record", record, "trajectory output");
  rn->add_option("-o", out)->required();
  rn->callback([&] { code = run(conf, steps, record, out); });

  auto* dec = app.add_subcommand("decode", "Read the simulated register back");
  std::string state;
  dec->add_option("--flavour", flavour, "ignored, the layout records it");
  dec->add_option("--layout", layout)->required();
  dec->add_option("--state", state)->required();
  dec->add_option("-o", out)->required();
  dec->callback([&] { code = decode(layout, state, out); });

  auto* ver = app.add_subcommand("verify", "Checks; exit status 0 on pass, 1 on fail");
  ver->require_subcommand(1);
  std::string machine = "weak";
  int samples = 1000, trials = 100, macro = 3;
  std::uint64_t seed = 1;
  auto* vu = ver->add_subcommand("unitary", "Unitarity of the scattering unitary");
  vu->add_option("--machine", machine)->check(CLI::IsMember({"weak", "strong"}));
  vu->add_option("--samples", samples);
  vu->add_option("--seed", seed);
  vu->callback([&] { code = verify_unitary(machine, samples, seed); });
  auto* va = ver->add_subcommand("axioms", "Shift invariance and causality");
  va->add_option("--machine", machine)->check(CLI::IsMember({"weak", "strong"}));
  va->add_option("--trials", trials);
  va->add_option("--seed", seed);
  va->callback([&] { code = verify_axioms(machine, trials, seed); });
  auto* vs = ver->add_subcommand("simulate", "Encoded run against the direct simulation");
  vs->add_option("--circuit", circ)->required();
  vs->add_option("--input", input)->required();
  vs->add_option("--flavour", flavour)->check(CLI::IsMember({"weak", "strong"}));
  vs->add_option("--macro", macro)->check(CLI::PositiveNumber);
  vs->callback([&] { code = verify_simulate(circ, input, flavour, macro); });

  auto* dm = app.add_subcommand("demo", "Draw one of the figure demos and check it");
  std::string name;
  dm->add_option("name", name)->required()->check(CLI::IsMember(demo::names()));
  dm->add_option("-o", out)->required();
  dm->callback([&] { code = run_demo(name, out); });

  auto* rd = app.add_subcommand("render", "Draw a recorded trajectory as a PPM");
  std::string traj, legend;
  int scale = 2;
  rd->add_option("--traj", traj)->required();
  rd->add_option("--legend", legend)->required()->check(CLI::IsMember({"ternary", "dataflow", "circuitry", "strong"}));
  rd->add_option("--scale", scale)->check(CLI::Range(1, 16));
  rd->add_option("-o", out)->required();
  rd->callback([&] { code = render(traj, legend, out, scale); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 2 : 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return code;
}
