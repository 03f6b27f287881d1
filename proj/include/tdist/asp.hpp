#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "tdist/schedule.hpp"

namespace tdist {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IncompleteModel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input facts of the optimisation model, one per line. Band thresholds are
/// emitted multiplied by 10 (a comment line states the scale). Only streets on
/// some candidate route are listed. Simulated vehicles' committed times are
/// emitted as `enter/3` and `exit/3` facts.
std::string export_asp_facts(const Instance& instance);

/// `solutionRoute/2`, `enter/3` and `exit/3` atoms of a schedule, one per line.
std::string render_model(const Instance& instance, const Schedule& schedule);

/// Reads the output atoms of one answer set back into a schedule in instance
/// order. Other predicates are ignored; periods and whitespace separate atoms.
/// Throws ParseError on malformed atoms or unknown ids, IncompleteModel when a
/// vehicle lacks a route or a street of that route lacks times.
Schedule import_asp_model(std::string_view text, const Instance& instance);

}  // namespace tdist
