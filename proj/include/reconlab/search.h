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

// Bounded integer variables under 0/1 equality rows: bound propagation with
// an undo trail, and a depth-first search built on it.

#ifndef RECONLAB_SEARCH_H_
#define RECONLAB_SEARCH_H_

#include <chrono>
#include <cstdint>
#include <functional>
#include <vector>

namespace reconlab {

// sum of x[v] over `vars` equals `rhs`.
struct EqRow {
  std::vector<int> vars;
  int64_t rhs = 0;
};

class Propagator {
 public:
  Propagator(const std::vector<int64_t>& ub, const std::vector<EqRow>& rows);

  size_t num_vars() const { return lo_.size(); }
  int64_t lo(int v) const { return lo_[v]; }
  int64_t hi(int v) const { return hi_[v]; }
  bool fixed(int v) const { return lo_[v] == hi_[v]; }

  // Tightens the bounds of v and queues its rows. False on an empty domain.
  bool Restrict(int v, int64_t lo, int64_t hi);
  // Runs queued rows to a fixpoint. False on a contradiction; the queue is
  // cleared either way.
  bool Propagate();

  size_t Mark() const { return trail_.size(); }
  void Undo(size_t mark);

  int64_t propagations() const { return propagations_; }
  const std::vector<EqRow>& rows() const { return rows_; }
  const std::vector<int>& RowsOf(int v) const { return var_rows_[v]; }
  // Queues every row (used once before the root propagation).
  void QueueAll();

 private:
  struct TrailEntry {
    int var;
    int64_t lo, hi;
  };
  void SetBounds(int v, int64_t lo, int64_t hi);
  bool PropagateRow(int r);

  std::vector<EqRow> rows_;
  std::vector<std::vector<int>> var_rows_;
  std::vector<int64_t> lo_, hi_;
  std::vector<int64_t> min_sum_, max_sum_, max_width_;
  std::vector<TrailEntry> trail_;
  std::vector<int> queue_;
  std::vector<char> queued_;
  int64_t propagations_ = 0;
};

struct SearchLimits {
  int64_t max_nodes = 1'000'000;
  double max_seconds = 30.0;
  // LP relaxation pruning runs at nodes with at most this many free
  // variables (0 disables it).
  int lp_max_free = 60;
  // Branch on the lowest-id free variable, values ascending. The result is
  // then the lexicographically smallest solution.
  bool lexicographic = false;
  // When positive, SolveFeasible-style callers restart with derived seeds
  // and node budgets restart_nodes, 2*restart_nodes, ... until max_nodes is
  // spent.
  int64_t restart_nodes = 2000;
};

enum class SearchOutcome { kComplete, kStopped, kBudgetExceeded };

struct SearchStats {
  int64_t nodes = 0;
  int64_t propagations = 0;
  int64_t lp_calls = 0;
  int64_t lp_prunes = 0;
};

// Depth-first search over all solutions. `on_solution` receives the full
// assignment and returns false to stop. Returns kComplete when the space
// was exhausted.
SearchOutcome SearchSolutions(const std::vector<int64_t>& ub, const std::vector<EqRow>& rows,
                              const SearchLimits& limits, uint64_t seed,
                              const std::function<bool(const std::vector<int64_t>&)>& on_solution,
                              SearchStats* stats);

// True if the LP relaxation of the rows, restricted to the propagator's
// current bounds, is feasible.
bool RelaxationFeasible(const Propagator& p);

}  // namespace reconlab

#endif  // RECONLAB_SEARCH_H_
