//
// Copyright 2026 The ReconLab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Small dense linear programs: bounded-variable two-phase primal simplex
// over a full tableau. Intended for relaxations with at most a few hundred
// rows and columns.

#ifndef RECONLAB_LP_H_
#define RECONLAB_LP_H_

#include <limits>
#include <utility>
#include <vector>

namespace reconlab {

inline constexpr double kLpInf = std::numeric_limits<double>::infinity();

struct LpRow {
  enum class Sense { kEq, kLe, kGe };
  std::vector<std::pair<int, double>> coefs;
  Sense sense = Sense::kEq;
  double rhs = 0.0;
};

// minimize cost . x  subject to rows and lb <= x <= ub. Lower bounds must be
// finite.
struct LpProblem {
  std::vector<double> lb;
  std::vector<double> ub;
  std::vector<double> cost;
  std::vector<LpRow> rows;

  int AddVar(double lo, double hi, double c = 0.0) {
    lb.push_back(lo);
    ub.push_back(hi);
    cost.push_back(c);
    return static_cast<int>(lb.size()) - 1;
  }
  size_t num_vars() const { return lb.size(); }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  double objective = 0.0;
  std::vector<double> x;
  int iterations = 0;
};

LpResult SolveLp(const LpProblem& lp, int max_iterations = 20000);

}  // namespace reconlab

#endif  // RECONLAB_LP_H_
