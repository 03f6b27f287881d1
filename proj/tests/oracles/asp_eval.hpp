#pragma once

#include <set>
#include <string>
#include <string_view>

namespace oracle {

struct Evaluation {
  std::set<std::string> violated;  ///< names of the broken rules ("r1" ... "r13")
  long long level2 = 0;
  long long level1 = 0;
};

/// Evaluates the optimisation encoding rule by rule on the atom set formed by
/// the instance facts and the model atoms. Works on the text only: it shares
/// no code with the engine's checker. Thresholds are read with the x10 scale.
Evaluation evaluate(std::string_view facts, std::string_view model);

}  // namespace oracle
