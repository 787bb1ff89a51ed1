#pragma once
// Spacetime-diagram demos with structural checks on their pixel grids.

#include <map>
#include <string>
#include <vector>

#include "io.hpp"

namespace uqca::demo {

struct Check {
  std::string what;
  bool pass;
  std::string detail;
};

struct Result {
  std::string name;
  io::Image image;
  std::vector<Check> checks;
  std::map<std::string, long> measured;  // quantities read off the picture
  bool pass() const {
    for (auto& c : checks)
      if (!c.pass) return false;
    return !checks.empty();
  }
  std::string ppm() const { return io::to_ppm(image); }
};

const std::vector<std::string>& names();

// Throws std::invalid_argument for unknown names.
Result run(const std::string& name);

}  // namespace uqca::demo
