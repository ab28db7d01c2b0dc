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

#include "reconlab/search.h"

#include <algorithm>
#include <map>

#include "reconlab/lp.h"
#include "reconlab/rng.h"

namespace reconlab {

Propagator::Propagator(const std::vector<int64_t>& ub, const std::vector<EqRow>& rows)
    : rows_(rows), var_rows_(ub.size()), lo_(ub.size(), 0), hi_(ub) {
  min_sum_.assign(rows_.size(), 0);
  max_sum_.assign(rows_.size(), 0);
  max_width_.assign(rows_.size(), 0);
  queued_.assign(rows_.size(), 0);
  for (size_t r = 0; r < rows_.size(); ++r) {
    for (int v : rows_[r].vars) {
      var_rows_[v].push_back(static_cast<int>(r));
      max_sum_[r] += hi_[v];
      max_width_[r] = std::max(max_width_[r], hi_[v]);
    }
  }
}

void Propagator::QueueAll() {
  for (size_t r = 0; r < rows_.size(); ++r) {
    if (!queued_[r]) {
      queued_[r] = 1;
      queue_.push_back(static_cast<int>(r));
    }
  }
}

void Propagator::SetBounds(int v, int64_t lo, int64_t hi) {
  trail_.push_back({v, lo_[v], hi_[v]});
  const int64_t dlo = lo - lo_[v];
  const int64_t dhi = hi - hi_[v];
  lo_[v] = lo;
  hi_[v] = hi;
  for (int r : var_rows_[v]) {
    min_sum_[r] += dlo;
    max_sum_[r] += dhi;
    if (!queued_[r]) {
      queued_[r] = 1;
      queue_.push_back(r);
    }
  }
}

bool Propagator::Restrict(int v, int64_t lo, int64_t hi) {
  lo = std::max(lo, lo_[v]);
  hi = std::min(hi, hi_[v]);
  if (lo > hi) return false;
  if (lo != lo_[v] || hi != hi_[v]) SetBounds(v, lo, hi);
  return true;
}

bool Propagator::PropagateRow(int r) {
  ++propagations_;
  const EqRow& row = rows_[r];
  const int64_t slack_lo = row.rhs - min_sum_[r];
  const int64_t slack_hi = max_sum_[r] - row.rhs;
  if (slack_lo < 0 || slack_hi < 0) return false;
  if (slack_lo >= max_width_[r] && slack_hi >= max_width_[r]) return true;
  for (int v : row.vars) {
    int64_t lo = lo_[v], hi = hi_[v];
    if (hi - lo > slack_lo) hi = lo + slack_lo;
    if (hi - lo > slack_hi) lo = hi - slack_hi;
    if (lo != lo_[v] || hi != hi_[v]) SetBounds(v, lo, hi);
  }
  return true;
}

bool Propagator::Propagate() {
  while (!queue_.empty()) {
    const int r = queue_.back();
    queue_.pop_back();
    queued_[r] = 0;
    if (!PropagateRow(r)) {
      for (int q : queue_) queued_[q] = 0;
      queue_.clear();
      return false;
    }
  }
  return true;
}

void Propagator::Undo(size_t mark) {
  while (trail_.size() > mark) {
    const TrailEntry e = trail_.back();
    trail_.pop_back();
    const int64_t dlo = e.lo - lo_[e.var];
    const int64_t dhi = e.hi - hi_[e.var];
    for (int r : var_rows_[e.var]) {
      min_sum_[r] += dlo;
      max_sum_[r] += dhi;
    }
    lo_[e.var] = e.lo;
    hi_[e.var] = e.hi;
  }
}

bool RelaxationFeasible(const Propagator& p) {
  const int n = static_cast<int>(p.num_vars());
  std::vector<int> lp_index(n, -1);
  LpProblem lp;
  for (int v = 0; v < n; ++v) {
    if (!p.fixed(v)) lp_index[v] = lp.AddVar(0.0, static_cast<double>(p.hi(v) - p.lo(v)));
  }
  if (lp.num_vars() == 0) return true;
  std::vector<char> seen(p.rows().size(), 0);
  std::map<std::vector<int>, int64_t> unique_rows;
  for (int v = 0; v < n; ++v) {
    if (lp_index[v] < 0) continue;
    for (int r : p.RowsOf(v)) {
      if (seen[r]) continue;
      seen[r] = 1;
      std::vector<int> support;
      int64_t rhs = p.rows()[r].rhs;
      for (int u : p.rows()[r].vars) {
        rhs -= p.lo(u);
        if (lp_index[u] >= 0) support.push_back(lp_index[u]);
      }
      auto [it, inserted] = unique_rows.emplace(std::move(support), rhs);
      if (!inserted && it->second != rhs) return false;
    }
  }
  for (const auto& [support, rhs] : unique_rows) {
    LpRow row;
    row.rhs = static_cast<double>(rhs);
    for (int j : support) row.coefs.push_back({j, 1.0});
    lp.rows.push_back(std::move(row));
  }
  const LpResult res = SolveLp(lp);
  return res.status != LpStatus::kInfeasible;
}

SearchOutcome SearchSolutions(const std::vector<int64_t>& ub, const std::vector<EqRow>& rows,
                              const SearchLimits& limits, uint64_t seed,
                              const std::function<bool(const std::vector<int64_t>&)>& on_solution,
                              SearchStats* stats) {
  SearchStats local;
  SearchStats& st = stats ? *stats : local;
  const auto start = std::chrono::steady_clock::now();
  Propagator p(ub, rows);
  const int n = static_cast<int>(ub.size());

  auto count_free = [&]() {
    int free = 0;
    for (int v = 0; v < n; ++v) free += !p.fixed(v);
    return free;
  };
  auto lp_ok = [&]() {
    if (limits.lp_max_free <= 0) return true;
    const int free = count_free();
    if (free == 0 || free > limits.lp_max_free) return true;
    ++st.lp_calls;
    if (RelaxationFeasible(p)) return true;
    ++st.lp_prunes;
    return false;
  };
  auto finish = [&](SearchOutcome o) {
    st.propagations += p.propagations();
    return o;
  };

  p.QueueAll();
  if (!p.Propagate() || !lp_ok()) return finish(SearchOutcome::kComplete);

  struct Frame {
    int var;
    int64_t next, last, step;
    size_t mark;
  };
  std::vector<Frame> stack;
  std::vector<int64_t> assignment(n);

  auto pick = [&]() {
    int best = -1;
    int64_t best_width = 0;
    for (int v = 0; v < n; ++v) {
      const int64_t w = p.hi(v) - p.lo(v);
      if (w == 0) continue;
      if (limits.lexicographic) return v;
      if (best < 0 || w < best_width) {
        best = v;
        best_width = w;
      }
    }
    return best;
  };

  while (true) {
    const int v = pick();
    if (v < 0) {
      for (int u = 0; u < n; ++u) assignment[u] = p.lo(u);
      if (!on_solution(assignment)) return finish(SearchOutcome::kStopped);
    } else {
      bool descending = false;
      if (!limits.lexicographic && seed != 0) {
        descending = (Mix64(seed ^ (static_cast<uint64_t>(v) * 0x9e3779b97f4a7c15ULL)) & 1) != 0;
      }
      Frame f{v, p.lo(v), p.hi(v), 1, p.Mark()};
      if (descending) f = {v, p.hi(v), p.lo(v), -1, p.Mark()};
      stack.push_back(f);
    }

    bool descended = false;
    while (!stack.empty()) {
      Frame& f = stack.back();
      p.Undo(f.mark);
      if ((f.step > 0 && f.next > f.last) || (f.step < 0 && f.next < f.last)) {
        stack.pop_back();
        continue;
      }
      const int64_t value = f.next;
      f.next += f.step;
      ++st.nodes;
      if (st.nodes > limits.max_nodes) return finish(SearchOutcome::kBudgetExceeded);
      if ((st.nodes & 255) == 0 && limits.max_seconds > 0) {
        const std::chrono::duration<double> el = std::chrono::steady_clock::now() - start;
        if (el.count() > limits.max_seconds) return finish(SearchOutcome::kBudgetExceeded);
      }
      if (p.Restrict(f.var, value, value) && p.Propagate() && lp_ok()) {
        descended = true;
        break;
      }
    }
    if (!descended) return finish(SearchOutcome::kComplete);
  }
}

}  // namespace reconlab
