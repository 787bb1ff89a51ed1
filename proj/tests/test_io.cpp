#include <doctest.h>

#include "uqca/demos.hpp"
#include "uqca/io.hpp"
#include "uqca/weak.hpp"

using namespace uqca;

TEST_CASE("circuit text round trips") {
  Circuit c{2, {{Gate::H1, -1}, {Gate::CPhase, 0}, {Gate::Swap, 1}}};
  auto text = io::serialize_circuit(c);
  auto back = io::parse_circuit(text);
  CHECK(back.n == 2);
  CHECK(back.gates == c.gates);
  auto commented = io::parse_circuit("# a comment\nuqca-circuit v1\n\nwidth 2  # two qubits\ngate h2 @ 0\n");
  CHECK(commented.n == 1);
  CHECK(commented.gates.size() == 1);
}

TEST_CASE("circuit parse errors carry line numbers") {
  auto line_of = [](const std::string& text) {
    try {
      io::parse_circuit(text);
    } catch (const io::ParseError& e) {
      return e.line;
    }
    return -1;
  };
  CHECK(line_of("uqca-circuit v1\nwidth 2\ngate toffoli @ 0\n") == 3);
  CHECK(line_of("uqca-circuit v1\nwidth 4\n\ngate swap @ 2\n") == 4);
  CHECK(line_of("uqca-circuit v1\nwidth 3\n") == 2);
  CHECK(line_of("uqca-circuit v2\n") == 1);
  CHECK(line_of("uqca-circuit v1\ngate swap @ 0\n") == 2);
}

TEST_CASE("configuration and state files") {
  auto conf = io::parse_state("uqca-conf v1\nalphabet weak\noffset 5\ncells\n0 0 1\n1 2 0\nend\n");
  REQUIRE(conf.state.terms.size() == 1);
  auto& cfg = conf.state.terms.begin()->first;
  CHECK(cfg.offset == 5);
  CHECK(cfg.cells.size() == 2);
  CHECK(io::parse_state(io::serialize_state(conf)).state.terms == conf.state.terms);

  SparseState s;
  s.alpha = &sim_alphabet();
  s.add(Config{0, {1, 2}}, cplx(0.6, 0));
  s.add(Config{0, {2, 2}}, cplx(0, -0.8));
  io::StateFile f{s, 12};
  auto back = io::parse_state(io::serialize_state(f));
  CHECK(back.step == 12);
  CHECK(back.state.terms == s.terms);

  CHECK_THROWS_AS(io::parse_state("uqca-state v1\nalphabet sim\nterm 0.5 0\noffset 0\ncells\n1\nend\n"), io::ParseError);
  // a digit beyond the subsystem size is rejected with its line
  try {
    io::parse_state("uqca-conf v1\nalphabet strong\noffset 0\ncells\n3 0 1 3 0 0 0 0\nend\n");
    FAIL("accepted an out-of-range digit");
  } catch (const io::ParseError& e) {
    CHECK(e.line == 5);
  }
}

TEST_CASE("trajectory and layout files") {
  auto st = SparseState::basis(weak_alphabet(), Config{0, {weak::WeakCell{1, 0, 1}.pack(), weak::WeakCell{0, 1, 1}.pack()}});
  Trajectory tr;
  evolve(st, 4, weak::rule(), 1, &tr);
  long first = 0;
  std::istringstream in(io::serialize_trajectory(tr, 7));
  auto back = io::parse_trajectory(in, &first);
  CHECK(first == 7);
  REQUIRE(back.snaps.size() == tr.snaps.size());
  for (std::size_t k = 0; k < tr.snaps.size(); ++k) CHECK(back.snaps[k].terms == tr.snaps[k].terms);

  io::LayoutFile l{"strong", Circuit{1, {{Gate::Swap, 0}}}, 4, false, 30};
  std::istringstream li(io::serialize_layout(l));
  auto lb = io::parse_layout(li);
  CHECK(lb.flavour == "strong");
  CHECK(lb.qubits == 4);
  CHECK(lb.horizon == 30);
  CHECK(lb.circuit.gates == l.circuit.gates);
}

TEST_CASE("renderer puts the first step at the bottom and reports residual weight") {
  SparseState a = SparseState::basis(weak_alphabet(), Config{0, {weak::WeakCell{1, 0, 0}.pack()}});
  SparseState b;
  b.alpha = &weak_alphabet();
  b.add(Config{0, {weak::WeakCell{2, 0, 0}.pack()}}, std::sqrt(0.9));
  b.add(Config{0, {weak::WeakCell{1, 0, 0}.pack()}}, std::sqrt(0.1));
  Trajectory tr{{a, b}, 0};
  auto g = io::grid_of(tr, 0, 1);
  auto im = io::render(g, io::colouring("dataflow", weak_alphabet()), 1);
  CHECK(im.w == 1);
  CHECK(im.h == 2);
  CHECK(im.at(0, 1) == io::colours::white);  // step 0, data 1
  CHECK(im.at(0, 0) == io::colours::black);  // step 1, heaviest term has data 2
  CHECK(g.residual == doctest::Approx(0.1));
  auto ppm = io::to_ppm(im);
  CHECK(ppm.rfind("P6\n", 0) == 0);
  CHECK(ppm.find("residual-weight") != std::string::npos);
  CHECK(ppm.size() == ppm.find("255\n") + 4 + 6);
}

TEST_CASE("demos pass their pixel checks") {
  for (auto& name : demo::names()) {
    auto r = demo::run(name);
    for (auto& c : r.checks) CHECK_MESSAGE(c.pass, name, ": ", c.what, " ", c.detail);
  }
  CHECK_THROWS_AS(demo::run("fig-nothing"), std::invalid_argument);
}
