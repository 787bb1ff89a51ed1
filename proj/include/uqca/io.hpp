#pragma once
// Text formats (circuits, configurations, states, trajectories, layouts) and PPM rendering.

#include <array>
#include <cmath>
#include <cstdio>
#include <climits>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "gates.hpp"
#include "weak_compiler.hpp"

namespace uqca::io {

struct ParseError : std::runtime_error {
  int line;
  ParseError(int l, const std::string& m) : std::runtime_error("line " + std::to_string(l) + ": " + m), line(l) {}
};

// Non-empty lines with comments stripped, paired with 1-based line numbers.
inline std::vector<std::pair<int, std::vector<std::string>>> tokenize(std::istream& in) {
  std::vector<std::pair<int, std::vector<std::string>>> out;
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    auto h = line.find('#');
    if (h != std::string::npos) line.resize(h);
    std::istringstream ss(line);
    std::vector<std::string> toks;
    for (std::string t; ss >> t;) toks.push_back(t);
    if (!toks.empty()) out.emplace_back(no, std::move(toks));
  }
  return out;
}

inline long to_long(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "expected an integer, got '" + s + "'");
  }
}

inline double to_double(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "expected a number, got '" + s + "'");
  }
}

// ---- circuits: "uqca-circuit v1", "width <2n>", "gate <name> @ <p>"

inline Circuit parse_circuit(std::istream& in) {
  auto lines = tokenize(in);
  if (lines.empty() || lines[0].second != std::vector<std::string>{"uqca-circuit", "v1"})
    throw ParseError(lines.empty() ? 1 : lines[0].first, "missing header 'uqca-circuit v1'");
  Circuit c;
  bool have_width = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto& [no, t] = lines[i];
    if (t[0] == "width") {
      if (t.size() != 2) throw ParseError(no, "usage: width <2n>");
      long w = to_long(t[1], no);
      if (w < 2 || w % 2) throw ParseError(no, "width must be a positive even number");
      c.n = (int)(w / 2);
      have_width = true;
    } else if (t[0] == "gate") {
      if (!have_width) throw ParseError(no, "gate before width");
      if (t.size() != 4 || t[2] != "@") throw ParseError(no, "usage: gate <swap|h2|h1|cphase> @ <p>");
      Gate g;
      try {
        g = gate_from_name(t[1]);
      } catch (const std::exception&) {
        throw ParseError(no, "unknown gate '" + t[1] + "'");
      }
      long p = to_long(t[3], no);
      if (p < -(c.n - 1) || p > c.n - 1)
        throw ParseError(no, "position " + std::to_string(p) + " out of range for width " + std::to_string(2 * c.n));
      c.gates.push_back({g, (int)p});
    } else {
      throw ParseError(no, "unknown directive '" + t[0] + "'");
    }
  }
  if (!have_width) throw ParseError(lines.back().first, "missing width");
  return c;
}

inline Circuit parse_circuit(const std::string& text) {
  std::istringstream in(text);
  return parse_circuit(in);
}

inline std::string serialize_circuit(const Circuit& c) {
  std::ostringstream o;
  o << "uqca-circuit v1\nwidth " << 2 * c.n << "\n";
  for (auto& g : c.gates) o << "gate " << gate_name(g.gate) << " @ " << g.pos << "\n";
  return o.str();
}

// ---- configurations and states

struct StateFile {
  SparseState state;
  long step = 0;  // engine steps already taken; the next step has parity step % 2
};

inline void write_body(std::ostream& o, const Alphabet& al, const Config& c) {
  o << "offset " << c.offset << "\ncells\n";
  for (Cell v : c.cells) {
    auto d = al.unpack(v);
    for (std::size_t i = 0; i < d.size(); ++i) o << (i ? " " : "") << d[i];
    o << "\n";
  }
  o << "end\n";
}

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Writes a single basis configuration as "uqca-conf v1" when possible, else "uqca-state v1".
inline std::string serialize_state(const StateFile& f) {
  const auto& s = f.state;
  std::ostringstream o;
  bool single = s.terms.size() == 1 && s.terms.begin()->second == cplx(1.0);
  o << (single ? "uqca-conf v1\n" : "uqca-state v1\n");
  o << "alphabet " << s.alpha->name << "\n";
  if (s.ring) o << "ring\n";
  if (f.step) o << "step " << f.step << "\n";
  if (single) {
    write_body(o, *s.alpha, s.terms.begin()->first);
    return o.str();
  }
  for (auto& [c, a] : s.terms) {
    o << "term " << fmt_double(a.real()) << " " << fmt_double(a.imag()) << "\n";
    write_body(o, *s.alpha, c);
  }
  return o.str();
}

inline StateFile parse_state(std::istream& in) {
  auto lines = tokenize(in);
  if (lines.empty()) throw ParseError(1, "empty file");
  auto& hdr = lines[0].second;
  bool conf = hdr == std::vector<std::string>{"uqca-conf", "v1"};
  if (!conf && hdr != std::vector<std::string>{"uqca-state", "v1"})
    throw ParseError(lines[0].first, "missing header 'uqca-conf v1' or 'uqca-state v1'");
  StateFile f;
  const Alphabet* al = nullptr;
  std::size_t i = 1;
  auto need = [&](const char* what) {
    if (i >= lines.size()) throw ParseError(lines.back().first, std::string("unexpected end of file, expected ") + what);
  };
  cplx amp = 1.0;
  bool in_term = conf;
  while (i < lines.size()) {
    auto& [no, t] = lines[i];
    if (t[0] == "alphabet") {
      if (t.size() != 2) throw ParseError(no, "usage: alphabet <weak|strong|sim>");
      try {
        al = &alphabet_by_name(t[1]);
      } catch (const std::exception&) {
        throw ParseError(no, "unknown alphabet '" + t[1] + "'");
      }
      f.state.alpha = al;
      ++i;
    } else if (t[0] == "ring") {
      f.state.ring = true;
      ++i;
    } else if (t[0] == "step") {
      if (t.size() != 2) throw ParseError(no, "usage: step <n>");
      f.step = to_long(t[1], no);
      ++i;
    } else if (t[0] == "term") {
      if (conf) throw ParseError(no, "'term' is not allowed in a configuration file");
      if (t.size() != 3) throw ParseError(no, "usage: term <re> <im>");
      amp = {to_double(t[1], no), to_double(t[2], no)};
      in_term = true;
      ++i;
    } else if (t[0] == "offset") {
      if (!al) throw ParseError(no, "alphabet must come first");
      if (!in_term) throw ParseError(no, "configuration body outside a term");
      if (t.size() != 2) throw ParseError(no, "usage: offset <int>");
      std::int64_t off = to_long(t[1], no);
      ++i;
      need("cells");
      if (lines[i].second != std::vector<std::string>{"cells"}) throw ParseError(lines[i].first, "expected 'cells'");
      ++i;
      std::vector<Cell> cells;
      for (;;) {
        need("end");
        auto& [cn, ct] = lines[i];
        ++i;
        if (ct.size() == 1 && ct[0] == "end") break;
        if ((int)ct.size() != al->arity())
          throw ParseError(cn, "expected " + std::to_string(al->arity()) + " digits for alphabet " + al->name);
        std::vector<int> d;
        for (auto& s : ct) d.push_back((int)to_long(s, cn));
        try {
          cells.push_back(al->pack(d));
        } catch (const std::exception& e) {
          throw ParseError(cn, e.what());
        }
      }
      Config c = f.state.ring ? Config{0, cells} : canonicalize(off, cells);
      if (f.state.terms.count(c)) throw ParseError(no, "duplicate configuration");
      f.state.terms[c] = amp;
      if (!conf) in_term = false;
      if (conf && i < lines.size()) throw ParseError(lines[i].first, "trailing content after configuration");
    } else {
      throw ParseError(no, "unknown directive '" + t[0] + "'");
    }
  }
  if (!al) throw ParseError(lines.back().first, "missing alphabet");
  if (f.state.terms.empty()) throw ParseError(lines.back().first, "no configuration");
  if (std::abs(f.state.norm2() - 1.0) > 1e-10)
    throw ParseError(lines.back().first, "state norm " + fmt_double(std::sqrt(f.state.norm2())) + " differs from 1");
  return f;
}

inline StateFile parse_state(const std::string& text) {
  std::istringstream in(text);
  return parse_state(in);
}

// ---- trajectories: "uqca-traj v1", "alphabet", then "snapshot <step>" followed by a state body

inline std::string serialize_trajectory(const Trajectory& tr, long first_step = 0) {
  std::ostringstream o;
  o << "uqca-traj v1\n";
  if (tr.snaps.empty()) return o.str();
  o << "alphabet " << tr.snaps[0].alpha->name << "\n";
  if (tr.snaps[0].ring) o << "ring\n";
  for (std::size_t k = 0; k < tr.snaps.size(); ++k) {
    o << "snapshot " << first_step + (long)k << "\n";
    for (auto& [c, a] : tr.snaps[k].terms) {
      o << "term " << fmt_double(a.real()) << " " << fmt_double(a.imag()) << "\n";
      write_body(o, *tr.snaps[k].alpha, c);
    }
  }
  return o.str();
}

inline Trajectory parse_trajectory(std::istream& in, long* first_step = nullptr) {
  std::stringstream all;
  all << in.rdbuf();
  std::string text = all.str();
  std::istringstream hs(text);
  auto lines = tokenize(hs);
  if (lines.empty() || lines[0].second != std::vector<std::string>{"uqca-traj", "v1"})
    throw ParseError(lines.empty() ? 1 : lines[0].first, "missing header 'uqca-traj v1'");
  std::string alpha_line, ring_line;
  Trajectory tr;
  std::ostringstream cur;
  bool open = false;
  long first = 0;
  auto flush = [&] {
    if (!open) return;
    std::string body = "uqca-state v1\n" + alpha_line + ring_line + cur.str();
    tr.snaps.push_back(parse_state(body).state);
    cur.str("");
  };
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto& [no, t] = lines[i];
    if (t[0] == "alphabet") {
      alpha_line = "alphabet " + (t.size() > 1 ? t[1] : "") + "\n";
    } else if (t[0] == "ring") {
      ring_line = "ring\n";
    } else if (t[0] == "snapshot") {
      flush();
      if (t.size() != 2) throw ParseError(no, "usage: snapshot <step>");
      if (!open) first = to_long(t[1], no);
      open = true;
    } else {
      if (!open) throw ParseError(no, "content before the first snapshot");
      for (std::size_t j = 0; j < t.size(); ++j) cur << (j ? " " : "") << t[j];
      cur << "\n";
    }
  }
  flush();
  tr.first_parity = (int)(first % 2);
  if (first_step) *first_step = first;
  return tr;
}

// ---- layouts: enough to rebuild the encoder's layout for decoding

struct LayoutFile {
  std::string flavour;  // weak, strong or once
  Circuit circuit;
  int qubits = 0;
  bool ring = false;
  long horizon = 0;
};

inline std::string serialize_layout(const LayoutFile& l) {
  std::ostringstream o;
  o << "uqca-layout v1\nflavour " << l.flavour << "\nqubits " << l.qubits << "\n";
  if (l.ring) o << "ring\n";
  o << "horizon " << l.horizon << "\n";
  std::string c = serialize_circuit(l.circuit);
  o << c.substr(c.find('\n') + 1);
  return o.str();
}

inline LayoutFile parse_layout(std::istream& in) {
  auto lines = tokenize(in);
  if (lines.empty() || lines[0].second != std::vector<std::string>{"uqca-layout", "v1"})
    throw ParseError(lines.empty() ? 1 : lines[0].first, "missing header 'uqca-layout v1'");
  LayoutFile l;
  std::string circ = "uqca-circuit v1\n";
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto& [no, t] = lines[i];
    if (t[0] == "flavour" && t.size() == 2) {
      if (t[1] != "weak" && t[1] != "strong" && t[1] != "once") throw ParseError(no, "unknown flavour '" + t[1] + "'");
      l.flavour = t[1];
    } else if (t[0] == "qubits" && t.size() == 2) {
      l.qubits = (int)to_long(t[1], no);
    } else if (t[0] == "ring" && t.size() == 1) {
      l.ring = true;
    } else if (t[0] == "horizon" && t.size() == 2) {
      l.horizon = to_long(t[1], no);
    } else if (t[0] == "width" || t[0] == "gate") {
      for (std::size_t j = 0; j < t.size(); ++j) circ += (j ? " " : "") + t[j];
      circ += "\n";
    } else {
      throw ParseError(no, "unknown directive '" + t[0] + "'");
    }
  }
  if (l.flavour.empty()) throw ParseError(lines.back().first, "missing flavour");
  l.circuit = parse_circuit(circ);
  return l;
}

// ---- legends and PPM

struct Rgb {
  unsigned char r, g, b;
  bool operator==(const Rgb&) const = default;
};

// First matching rule wins; a pattern has one character per subsystem, a digit or '?'.
struct Legend {
  std::string name;
  std::vector<std::pair<std::string, Rgb>> rules;
  Rgb fallback{255, 255, 255};

  Rgb colour(const Alphabet& al, Cell c) const {
    auto d = al.unpack(c);
    for (auto& [pat, rgb] : rules) {
      if ((int)pat.size() != al.arity()) continue;
      bool ok = true;
      for (std::size_t i = 0; i < pat.size() && ok; ++i)
        if (pat[i] != '?' && pat[i] - '0' != d[i]) ok = false;
      if (ok) return rgb;
    }
    return fallback;
  }
};

namespace colours {
inline constexpr Rgb light{205, 205, 205}, middle{150, 150, 150}, dark{95, 95, 95}, black{0, 0, 0},
    white{255, 255, 255}, wall_outer{200, 40, 40}, wall_inner{40, 80, 200}, half2{235, 180, 60},
    half3{140, 60, 160}, signal{110, 50, 10}, quiescent{255, 255, 240};
// bouncer values 1..3
inline constexpr Rgb bouncer[3] = {{120, 210, 120}, {40, 160, 60}, {10, 90, 30}};
}

inline const Legend& legend(const std::string& name) {
  using namespace colours;
  static const std::vector<Legend> all = [] {
    std::vector<Legend> v;
    // weak digit order: data, program, mode
    v.push_back({"ternary", {{"000", light}, {"?1?", black}, {"??0", light}, {"??1", middle}, {"??2", dark}}, white});
    v.push_back({"dataflow",
                 {{"000", light}, {"1??", white}, {"2??", black}, {"??0", light}, {"??1", middle}, {"??2", dark}},
                 white});
    v.push_back({"circuitry",
                 {{"1??", white}, {"2??", black}, {"?3?", half3}, {"?2?", half2}, {"?1?", signal}, {"??0", light},
                  {"??1", middle}, {"??2", dark}},
                 white});
    return v;
  }();
  for (auto& l : all)
    if (l.name == name) return l;
  throw std::invalid_argument("unknown legend " + name);
}

// The strong legend layers band digits over the circuitry colours of the weak part.
inline Rgb strong_colour(Cell c) {
  using namespace colours;
  auto d = strong_alphabet().unpack(c);
  if (c == 0) return quiescent;
  if (d[2] == 1) return wall_outer;
  if (d[2] == 2) return wall_inner;
  if (d[4]) return bouncer[d[4] - 1];
  return legend("circuitry").colour(weak_alphabet(), weak_alphabet().pack({d[1], d[5], d[6]}));
}

struct Image {
  int w = 0, h = 0;
  std::vector<Rgb> px;
  std::vector<std::string> comments;
  Rgb at(int x, int y) const { return px[(std::size_t)y * w + x]; }
  Rgb& at(int x, int y) { return px[(std::size_t)y * w + x]; }
};

inline std::string to_ppm(const Image& im) {
  std::string out = "P6\n";
  for (auto& c : im.comments) out += "# " + c + "\n";
  out += std::to_string(im.w) + " " + std::to_string(im.h) + "\n255\n";
  for (auto& p : im.px) {
    out.push_back((char)p.r);
    out.push_back((char)p.g);
    out.push_back((char)p.b);
  }
  return out;
}

// Cell grid of a trajectory: row k is snapshot k, columns cover [x0, x1). Superposed snapshots
// show their heaviest term; the largest residual weight is reported.
struct Grid {
  std::int64_t x0 = 0, x1 = 0;
  std::vector<std::vector<Cell>> rows;
  double residual = 0;
  const Alphabet* alpha = nullptr;
  Cell at(std::int64_t x, std::size_t k) const { return rows[k][(std::size_t)(x - x0)]; }
};

inline Grid grid_of(const Trajectory& tr, std::int64_t x0, std::int64_t x1) {
  Grid g;
  g.x0 = x0;
  g.x1 = x1;
  for (auto& s : tr.snaps) {
    g.alpha = s.alpha;
    const Config* best = nullptr;
    double bw = -1, total = 0;
    for (auto& [c, a] : s.terms) {
      total += std::norm(a);
      if (std::norm(a) > bw) bw = std::norm(a), best = &c;
    }
    g.residual = std::max(g.residual, total - std::max(bw, 0.0));
    std::vector<Cell> row((std::size_t)(x1 - x0), 0);
    if (best) {
      const std::int64_t n = (std::int64_t)best->cells.size();
      for (std::int64_t x = x0; x < x1; ++x)
        row[(std::size_t)(x - x0)] = s.ring ? best->cells[(std::size_t)(((x % n) + n) % n)] : best->at(x);
    }
    g.rows.push_back(std::move(row));
  }
  return g;
}

// Extent covering every snapshot of a finite trajectory.
inline std::pair<std::int64_t, std::int64_t> extent(const Trajectory& tr) {
  std::int64_t lo = INT64_MAX, hi = INT64_MIN;
  for (auto& s : tr.snaps)
    for (auto& [c, a] : s.terms)
      if (!c.cells.empty()) {
        lo = std::min(lo, c.offset);
        hi = std::max(hi, c.end());
      }
  if (lo > hi) return {0, 1};
  return {lo, hi};
}

// Time flows upwards: the first snapshot is the bottom row. Each cell is a scale x scale block.
inline Image render(const Grid& g, const std::function<Rgb(Cell)>& colour, int scale = 2) {
  Image im;
  im.w = (int)(g.x1 - g.x0) * scale;
  im.h = (int)g.rows.size() * scale;
  im.px.assign((std::size_t)im.w * im.h, Rgb{255, 255, 255});
  for (std::size_t k = 0; k < g.rows.size(); ++k)
    for (std::int64_t x = g.x0; x < g.x1; ++x) {
      Rgb c = colour(g.at(x, k));
      int px = (int)(x - g.x0) * scale, py = im.h - (int)(k + 1) * scale;
      for (int a = 0; a < scale; ++a)
        for (int b = 0; b < scale; ++b) im.at(px + a, py + b) = c;
    }
  im.comments.push_back("cells " + std::to_string(g.x0) + " " + std::to_string(g.x1) + " steps " +
                        std::to_string(g.rows.size()) + " scale " + std::to_string(scale));
  if (g.residual > 0) im.comments.push_back("residual-weight " + fmt_double(g.residual));
  return im;
}

inline std::function<Rgb(Cell)> colouring(const std::string& legend_name, const Alphabet& al) {
  if (legend_name == "strong") return [](Cell c) { return strong_colour(c); };
  const Legend& l = legend(legend_name);
  if (al.arity() != 3) throw std::invalid_argument("legend " + legend_name + " is for weak tapes");
  return [&l, &al](Cell c) { return l.colour(al, c); };
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << data;
  if (!f) throw std::runtime_error("write failed for " + path);
}

}  // namespace uqca::io
