#pragma once

#include <stdexcept>
#include <string>

namespace zofield {

// Invalid user input: malformed config files, bad parameter values,
// sentences that do not validate.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Sentence text that fails to parse; carries the source position.
struct parse_error : config_error {
  parse_error(int line_, int column_, const std::string& what)
      : config_error("parse error at " + std::to_string(line_) + ":" +
                     std::to_string(column_) + ": " + what),
        line(line_),
        column(column_) {}
  int line;
  int column;
};

// A request exceeds an enumeration bound (ball too large, state space too big).
struct cap_error : std::runtime_error {
  explicit cap_error(const std::string& what) : std::runtime_error(what) {}
};

// Geometrically impossible request on the given torus.
struct infeasible_error : std::runtime_error {
  explicit infeasible_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace zofield
