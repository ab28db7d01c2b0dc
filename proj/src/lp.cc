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

#include "reconlab/lp.h"

#include <cmath>
#include <stdexcept>

namespace reconlab {
namespace {

constexpr double kEps = 1e-9;
constexpr double kPivotTol = 1e-9;
// Consecutive degenerate pivots before switching to Bland's rule.
constexpr int kDegenerateLimit = 50;

class Tableau {
 public:
  Tableau(const LpProblem& lp) {
    n_ = static_cast<int>(lp.num_vars());
    m_ = static_cast<int>(lp.rows.size());
    lb_ = lp.lb;
    ub_ = lp.ub;
    for (int j = 0; j < n_; ++j) {
      if (!std::isfinite(lb_[j])) throw std::invalid_argument("LP lower bounds must be finite");
      if (lb_[j] > ub_[j] + kEps) infeasible_bounds_ = true;
    }
    // Slack columns.
    std::vector<int> slack_of(m_, -1);
    for (int i = 0; i < m_; ++i) {
      if (lp.rows[i].sense != LpRow::Sense::kEq) {
        slack_of[i] = static_cast<int>(lb_.size());
        lb_.push_back(0.0);
        ub_.push_back(kLpInf);
      }
    }
    first_art_ = static_cast<int>(lb_.size());
    cols_ = first_art_ + m_;
    lb_.resize(cols_, 0.0);
    ub_.resize(cols_, kLpInf);
    x_.assign(cols_, 0.0);
    for (int j = 0; j < first_art_; ++j) x_[j] = lb_[j];

    t_.assign(static_cast<size_t>(m_) * cols_, 0.0);
    std::vector<double> residual(m_);
    for (int i = 0; i < m_; ++i) {
      double* row = Row(i);
      const LpRow& r = lp.rows[i];
      for (const auto& [j, a] : r.coefs) row[j] += a;
      if (slack_of[i] >= 0) row[slack_of[i]] = r.sense == LpRow::Sense::kLe ? 1.0 : -1.0;
      double act = 0.0;
      for (int j = 0; j < first_art_; ++j) act += row[j] * x_[j];
      residual[i] = r.rhs - act;
      // Artificial column with sign chosen so the artificial starts >= 0;
      // normalize the row so the basis column is +1.
      if (residual[i] < 0) {
        for (int j = 0; j < first_art_; ++j) row[j] = -row[j];
        residual[i] = -residual[i];
      }
      row[first_art_ + i] = 1.0;
    }
    basis_.resize(m_);
    beta_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      basis_[i] = first_art_ + i;
      beta_[i] = residual[i];
      x_[first_art_ + i] = residual[i];
    }
    is_basic_.assign(cols_, 0);
    for (int i = 0; i < m_; ++i) is_basic_[basis_[i]] = 1;
  }

  bool infeasible_bounds() const { return infeasible_bounds_; }

  // Returns status of optimizing the given column costs.
  LpStatus Optimize(const std::vector<double>& cost, int& iterations, int max_iterations) {
    std::vector<double> d(cost);
    for (int i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = Row(i);
      for (int j = 0; j < cols_; ++j) d[j] -= cb * row[j];
    }
    int degenerate = 0;
    while (true) {
      if (iterations >= max_iterations) return LpStatus::kIterationLimit;
      const bool bland = degenerate >= kDegenerateLimit;
      int enter = -1;
      double best = 0.0;
      for (int j = 0; j < cols_; ++j) {
        if (is_basic_[j] || ub_[j] - lb_[j] <= kEps) continue;
        const bool at_lb = x_[j] <= lb_[j] + kEps;
        double gain = 0.0;
        if (at_lb && d[j] < -kEps) gain = -d[j];
        if (!at_lb && d[j] > kEps) gain = d[j];
        if (gain <= 0.0) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (gain > best) {
          best = gain;
          enter = j;
        }
      }
      if (enter < 0) return LpStatus::kOptimal;
      ++iterations;
      const double dir = x_[enter] <= lb_[enter] + kEps ? 1.0 : -1.0;

      // Ratio test.
      double step = ub_[enter] - lb_[enter];
      int leave = -1;
      double leave_alpha = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double alpha = Row(i)[enter];
        if (std::abs(alpha) < kPivotTol) continue;
        const double change = -dir * alpha;  // rate of change of basic var i
        const int b = basis_[i];
        double limit;
        if (change < 0) {
          limit = (beta_[i] - lb_[b]) / -change;
        } else {
          if (!std::isfinite(ub_[b])) continue;
          limit = (ub_[b] - beta_[i]) / change;
        }
        if (limit < 0) limit = 0;
        const bool take =
            limit < step - kEps ||
            (leave >= 0 && limit <= step + kEps &&
             (bland ? basis_[i] < basis_[leave] : std::abs(alpha) > std::abs(leave_alpha)));
        if (take) {
          step = limit;
          leave = i;
          leave_alpha = alpha;
        }
      }
      if (!std::isfinite(step)) return LpStatus::kUnbounded;
      degenerate = step <= kEps ? degenerate + 1 : 0;

      for (int i = 0; i < m_; ++i) beta_[i] -= dir * Row(i)[enter] * step;
      const double entered_value = x_[enter] + dir * step;
      if (leave < 0) {
        // Bound flip.
        x_[enter] = dir > 0 ? ub_[enter] : lb_[enter];
        SyncBasics();
        continue;
      }
      const int out = basis_[leave];
      const double out_change = -dir * leave_alpha;
      x_[out] = out_change < 0 ? lb_[out] : ub_[out];
      Pivot(leave, enter, d);
      beta_[leave] = entered_value;
      x_[enter] = entered_value;
      SyncBasics();
    }
  }

  // Phase-one objective: total value of basic artificials.
  double ArtificialSum() const {
    double s = 0.0;
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] >= first_art_) s += beta_[i];
    }
    return s;
  }

  void CloseArtificials() {
    for (int j = first_art_; j < cols_; ++j) ub_[j] = 0.0;
  }

  int cols() const { return cols_; }
  int first_art() const { return first_art_; }
  std::vector<double> Values(int n) const { return {x_.begin(), x_.begin() + n}; }

 private:
  double* Row(int i) { return &t_[static_cast<size_t>(i) * cols_]; }
  const double* Row(int i) const { return &t_[static_cast<size_t>(i) * cols_]; }

  void SyncBasics() {
    for (int i = 0; i < m_; ++i) x_[basis_[i]] = beta_[i];
  }

  void Pivot(int r, int c, std::vector<double>& d) {
    double* pr = Row(r);
    const double inv = 1.0 / pr[c];
    for (int j = 0; j < cols_; ++j) pr[j] *= inv;
    pr[c] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* pi = Row(i);
      const double f = pi[c];
      if (f == 0.0) continue;
      for (int j = 0; j < cols_; ++j) pi[j] -= f * pr[j];
      pi[c] = 0.0;
    }
    const double f = d[c];
    if (f != 0.0) {
      for (int j = 0; j < cols_; ++j) d[j] -= f * pr[j];
      d[c] = 0.0;
    }
    is_basic_[basis_[r]] = 0;
    basis_[r] = c;
    is_basic_[c] = 1;
  }

  int n_ = 0, m_ = 0, cols_ = 0, first_art_ = 0;
  bool infeasible_bounds_ = false;
  std::vector<double> lb_, ub_, x_, t_, beta_;
  std::vector<int> basis_;
  std::vector<char> is_basic_;
};

}  // namespace

LpResult SolveLp(const LpProblem& lp, int max_iterations) {
  LpResult result;
  Tableau tab(lp);
  if (tab.infeasible_bounds()) return result;

  std::vector<double> phase1(tab.cols(), 0.0);
  for (int j = tab.first_art(); j < tab.cols(); ++j) phase1[j] = 1.0;
  LpStatus st = tab.Optimize(phase1, result.iterations, max_iterations);
  if (st == LpStatus::kIterationLimit) {
    result.status = st;
    return result;
  }
  if (tab.ArtificialSum() > 1e-7) {
    result.status = LpStatus::kInfeasible;
    return result;
  }
  tab.CloseArtificials();

  std::vector<double> cost(tab.cols(), 0.0);
  bool has_cost = false;
  for (size_t j = 0; j < lp.cost.size(); ++j) {
    cost[j] = lp.cost[j];
    has_cost = has_cost || cost[j] != 0.0;
  }
  if (has_cost) {
    st = tab.Optimize(cost, result.iterations, max_iterations);
    if (st != LpStatus::kOptimal) {
      result.status = st;
      return result;
    }
  }
  result.status = LpStatus::kOptimal;
  result.x = tab.Values(static_cast<int>(lp.num_vars()));
  for (size_t j = 0; j < lp.cost.size(); ++j) result.objective += lp.cost[j] * result.x[j];
  return result;
}

}  // namespace reconlab
