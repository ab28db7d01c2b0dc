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

#include "reconlab/solvar.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "reconlab/csv.h"
#include "reconlab/lp.h"
#include "reconlab/rng.h"

namespace reconlab {
namespace {

using Sparse = std::vector<std::pair<int, int64_t>>;

Sparse ToSparse(const std::vector<int64_t>& x) {
  Sparse s;
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] != 0) s.push_back({static_cast<int>(i), x[i]});
  }
  return s;
}

int64_t SparseOverlap(const Sparse& a, const Sparse& b) {
  int64_t overlap = 0;
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first) {
      ++i;
    } else if (a[i].first > b[j].first) {
      ++j;
    } else {
      overlap += std::min(a[i].second, b[j].second);
      ++i;
      ++j;
    }
  }
  return overlap;
}

std::string Fixed1(double v) {
  std::ostringstream s;
  s.precision(1);
  s << std::fixed << v;
  return s.str();
}

std::string Fixed4(double v) {
  std::ostringstream s;
  s.precision(4);
  s << std::fixed << v;
  return s.str();
}

// Two-copy branch and bound: maximize N - sum_c min(x_c, y_c) over pairs
// of solutions, with LP bounds from the relaxation min sum m, m <= x,
// m <= y.
class PairSearch {
 public:
  PairSearch(const std::vector<int64_t>& ub, const std::vector<EqRow>& rows, int64_t population,
             int64_t node_budget)
      : x_(ub, rows), y_(ub, rows), population_(population), node_budget_(node_budget) {}

  // Returns true when the search finished within budget. `incumbent` is the
  // best d found so far and is updated in place.
  bool Run(int max_free, int64_t& incumbent) {
    x_.QueueAll();
    y_.QueueAll();
    if (!x_.Propagate() || !y_.Propagate()) throw InfeasibleProblem("no feasible solution");
    const int n = static_cast<int>(x_.num_vars());
    for (int v = 0; v < n; ++v) {
      if (x_.fixed(v)) {
        fixed_overlap_ += x_.lo(v);
      } else {
        free_.push_back(v);
      }
    }
    if (static_cast<int>(free_.size()) > max_free) return false;
    incumbent_ = &incumbent;
    return Node();
  }

 private:
  // Returns false when the node budget ran out.
  bool Node() {
    if (++nodes_ > node_budget_) return false;
    LpProblem lp;
    const int f = static_cast<int>(free_.size());
    for (int k = 0; k < f; ++k) lp.AddVar(double(x_.lo(free_[k])), double(x_.hi(free_[k])));
    for (int k = 0; k < f; ++k) lp.AddVar(double(y_.lo(free_[k])), double(y_.hi(free_[k])));
    for (int k = 0; k < f; ++k) {
      lp.AddVar(0.0, double(std::min(x_.hi(free_[k]), y_.hi(free_[k]))), 1.0);
    }
    std::vector<int> pos(x_.num_vars(), -1);
    for (int k = 0; k < f; ++k) pos[free_[k]] = k;
    for (int copy = 0; copy < 2; ++copy) {
      for (const EqRow& row : x_.rows()) {
        LpRow r;
        r.rhs = double(row.rhs);
        for (int v : row.vars) {
          if (pos[v] < 0) {
            r.rhs -= double(x_.lo(v));
          } else {
            r.coefs.push_back({copy * f + pos[v], 1.0});
          }
        }
        if (!r.coefs.empty()) lp.rows.push_back(std::move(r));
      }
    }
    for (int k = 0; k < f; ++k) {
      lp.rows.push_back({{{2 * f + k, 1.0}, {k, -1.0}}, LpRow::Sense::kLe, 0.0});
      lp.rows.push_back({{{2 * f + k, 1.0}, {f + k, -1.0}}, LpRow::Sense::kLe, 0.0});
    }
    const LpResult res = SolveLp(lp);
    if (res.status == LpStatus::kInfeasible) return true;
    if (res.status != LpStatus::kOptimal) return false;
    const int64_t min_overlap = fixed_overlap_ + static_cast<int64_t>(std::ceil(res.objective - 1e-6));
    if (population_ - min_overlap <= *incumbent_) return true;

    int branch = -1;
    double best_frac = 0.0;
    for (int j = 0; j < 2 * f; ++j) {
      const double frac = std::abs(res.x[j] - std::round(res.x[j]));
      if (frac > 1e-6 && frac > best_frac + 1e-9) {
        best_frac = frac;
        branch = j;
      }
    }
    if (branch < 0) {
      int64_t overlap = fixed_overlap_;
      for (int k = 0; k < f; ++k) {
        overlap += std::min(std::llround(res.x[k]), std::llround(res.x[f + k]));
      }
      *incumbent_ = std::max(*incumbent_, population_ - overlap);
      return true;
    }
    Propagator& p = branch < f ? x_ : y_;
    const int var = free_[branch % f];
    const int64_t floor_v = static_cast<int64_t>(std::floor(res.x[branch]));
    for (int side = 0; side < 2; ++side) {
      const size_t mark = p.Mark();
      const bool ok = side == 0 ? p.Restrict(var, p.lo(var), floor_v) : p.Restrict(var, floor_v + 1, p.hi(var));
      if (ok && p.Propagate()) {
        if (!Node()) {
          p.Undo(mark);
          return false;
        }
      }
      p.Undo(mark);
    }
    return true;
  }

  Propagator x_, y_;
  int64_t population_;
  int64_t node_budget_;
  int64_t nodes_ = 0;
  int64_t fixed_overlap_ = 0;
  std::vector<int> free_;
  int64_t* incumbent_ = nullptr;
};

}  // namespace

std::string_view SolvarStatusName(SolvarStatus s) {
  return s == SolvarStatus::kExact ? "exact" : "budget-exceeded-lower-bound";
}

int64_t HistogramDistance(const std::vector<int64_t>& x, const std::vector<int64_t>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("histogram size mismatch");
  int64_t n = 0, overlap = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    n += x[i];
    overlap += std::min(x[i], y[i]);
  }
  return n - overlap;
}

SolvarResult ComputeSolvar(const ReconProblem& p, const SolvarOptions& options) {
  if (p.mode != ReconMode::kBlock) throw std::invalid_argument("solvar needs a block problem");
  if (p.status == BuildStatus::kUnreconstructable) {
    throw std::invalid_argument("block " + p.geo + " is unreconstructable");
  }
  if (p.status == BuildStatus::kInfeasible) throw InfeasibleProblem("block " + p.geo + ": " + p.note);
  SolvarResult r;
  r.block = p.geo;
  r.population = p.population;

  const std::vector<EqRow> rows = p.EqRows();
  std::vector<Sparse> sols;
  const SearchOutcome outcome = SearchSolutions(
      p.ub, rows, options.enumerate_limits, 0,
      [&](const std::vector<int64_t>& x) {
        sols.push_back(ToSparse(x));
        return static_cast<int>(sols.size()) < options.enumerate_limit;
      },
      nullptr);
  if (sols.empty()) {
    if (outcome == SearchOutcome::kComplete) throw InfeasibleProblem("block " + p.geo + " has no solution");
  }
  r.solutions_seen = static_cast<int64_t>(sols.size());
  int64_t best = 0;
  for (size_t i = 0; i < sols.size(); ++i) {
    for (size_t j = i + 1; j < sols.size(); ++j) {
      best = std::max(best, p.population - SparseOverlap(sols[i], sols[j]));
    }
  }
  bool exact = outcome == SearchOutcome::kComplete;
  if (!exact && !sols.empty()) {
    PairSearch search(p.ub, rows, p.population, options.milp_nodes);
    exact = search.Run(options.milp_max_free, best);
  }
  r.dstar = best;
  r.status = exact ? SolvarStatus::kExact : SolvarStatus::kLowerBound;
  r.solvar = r.population > 0 ? 100.0 * double(best) / double(r.population) : 0.0;
  r.max_solvar = std::min(100.0, 2.0 * r.solvar);
  return r;
}

std::vector<double> DefaultPercentGrid() {
  std::vector<double> g;
  for (int p = 5; p <= 100; p += 5) g.push_back(p);
  return g;
}

std::vector<CumSolvarRow> CumSolvar(const std::vector<SolvarResult>& results,
                                    const std::vector<double>& percent_grid, uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<uint64_t, size_t>> tiebreak(results.size());
  for (size_t i = 0; i < results.size(); ++i) tiebreak[i] = {rng.NextU64(), i};
  std::vector<size_t> order(results.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (results[a].solvar != results[b].solvar) return results[a].solvar < results[b].solvar;
    return tiebreak[a] < tiebreak[b];
  });
  std::vector<CumSolvarRow> out;
  const size_t n = results.size();
  size_t taken = 0;
  int64_t cum_pop = 0, cum_d = 0;
  for (double pct : percent_grid) {
    const size_t upto = std::min(n, static_cast<size_t>(std::ceil(pct / 100.0 * double(n) - 1e-9)));
    CumSolvarRow row;
    row.percentile = pct;
    int64_t slice = 0;
    for (; taken < upto; ++taken) {
      const SolvarResult& r = results[order[taken]];
      slice += r.population;
      cum_d += r.dstar;
    }
    cum_pop += slice;
    row.population = slice;
    row.cum_population = cum_pop;
    if (taken > 0) {
      row.solvar = results[order[taken - 1]].solvar;
      row.max_solvar = results[order[taken - 1]].max_solvar;
    }
    row.cum_solvar = cum_pop > 0 ? 100.0 * double(cum_d) / double(cum_pop) : 0.0;
    row.max_cum_solvar = std::min(100.0, 2.0 * row.cum_solvar);
    out.push_back(row);
  }
  return out;
}

void WriteSolvar(const std::vector<SolvarResult>& results, const std::filesystem::path& path) {
  CsvWriter w(path);
  w.Row({"geocode", "population", "dstar", "solvar", "max_solvar", "status"});
  for (const auto& r : results) {
    w.Row({r.block, std::to_string(r.population), std::to_string(r.dstar), Fixed4(r.solvar),
           Fixed4(r.max_solvar), std::string(SolvarStatusName(r.status))});
  }
}

std::vector<SolvarResult> ReadSolvar(const std::filesystem::path& path) {
  const CsvTable t = ReadCsv(path);
  const size_t cg = t.Column("geocode"), cp = t.Column("population"), cd = t.Column("dstar"),
               cs = t.Column("status");
  std::vector<SolvarResult> out;
  for (const auto& row : t.rows) {
    SolvarResult r;
    r.block = row[cg];
    r.population = ParseInt(row[cp]);
    r.dstar = ParseInt(row[cd]);
    r.solvar = r.population > 0 ? 100.0 * double(r.dstar) / double(r.population) : 0.0;
    r.max_solvar = std::min(100.0, 2.0 * r.solvar);
    r.status = row[cs] == "exact" ? SolvarStatus::kExact : SolvarStatus::kLowerBound;
    out.push_back(r);
  }
  return out;
}

void WriteCumSolvar(const std::vector<CumSolvarRow>& rows, const std::filesystem::path& path) {
  CsvWriter w(path);
  w.Row({"percentile", "solvar", "max_solvar", "population", "cum_population", "cum_solvar",
         "max_cum_solvar"});
  for (const auto& r : rows) {
    w.Row({Fixed1(r.percentile), Fixed1(r.solvar), Fixed1(r.max_solvar), std::to_string(r.population),
           std::to_string(r.cum_population), Fixed1(r.cum_solvar), Fixed1(r.max_cum_solvar)});
  }
}

}  // namespace reconlab
