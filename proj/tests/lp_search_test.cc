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

#include <gtest/gtest.h>

#include <set>

#include "reconlab/lp.h"
#include "reconlab/search.h"

namespace reconlab {
namespace {

TEST(Lp, SolvesSmallProgram) {
  LpProblem lp;
  const int x = lp.AddVar(0, 1.5, 1.0);
  const int y = lp.AddVar(0, kLpInf, 2.0);
  lp.rows.push_back({{{x, 1.0}, {y, 1.0}}, LpRow::Sense::kGe, 2.0});
  const auto r = SolveLp(lp);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.objective, 2.5, 1e-9);
  EXPECT_NEAR(r.x[x], 1.5, 1e-9);
  EXPECT_NEAR(r.x[y], 0.5, 1e-9);
}

TEST(Lp, EqualityAndUpperRows) {
  LpProblem lp;
  const int a = lp.AddVar(0, kLpInf, -1.0);
  const int b = lp.AddVar(0, kLpInf, -1.0);
  lp.rows.push_back({{{a, 1.0}, {b, 2.0}}, LpRow::Sense::kLe, 4.0});
  lp.rows.push_back({{{a, 1.0}, {b, -1.0}}, LpRow::Sense::kEq, 1.0});
  const auto r = SolveLp(lp);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.x[a], 2.0, 1e-9);
  EXPECT_NEAR(r.x[b], 1.0, 1e-9);
}

TEST(Lp, DetectsInfeasibleAndUnbounded) {
  LpProblem inf;
  const int x = inf.AddVar(0, 1);
  const int y = inf.AddVar(0, 1);
  inf.rows.push_back({{{x, 1.0}, {y, 1.0}}, LpRow::Sense::kEq, 5.0});
  EXPECT_EQ(SolveLp(inf).status, LpStatus::kInfeasible);

  LpProblem unb;
  const int z = unb.AddVar(0, kLpInf, -1.0);
  unb.rows.push_back({{{z, 1.0}}, LpRow::Sense::kGe, 1.0});
  EXPECT_EQ(SolveLp(unb).status, LpStatus::kUnbounded);
}

TEST(Propagator, FixesImpliedValues) {
  Propagator p({1, 1, 2}, {{{0, 1}, 1}, {{1, 2}, 2}});
  p.QueueAll();
  ASSERT_TRUE(p.Propagate());
  const size_t mark = p.Mark();
  ASSERT_TRUE(p.Restrict(0, 1, 1));
  ASSERT_TRUE(p.Propagate());
  EXPECT_TRUE(p.fixed(1));
  EXPECT_EQ(p.lo(1), 0);
  EXPECT_EQ(p.lo(2), 2);
  p.Undo(mark);
  EXPECT_FALSE(p.fixed(1));
}

TEST(Propagator, DetectsContradiction) {
  Propagator p({1, 1}, {{{0, 1}, 3}});
  p.QueueAll();
  EXPECT_FALSE(p.Propagate());
}

TEST(Search, EnumeratesEverySolution) {
  std::set<std::vector<int64_t>> seen;
  SearchStats stats;
  const auto outcome = SearchSolutions({2, 2, 2}, {{{0, 1, 2}, 2}}, SearchLimits{}, 3,
                                       [&](const std::vector<int64_t>& x) {
                                         seen.insert(x);
                                         return true;
                                       },
                                       &stats);
  EXPECT_EQ(outcome, SearchOutcome::kComplete);
  EXPECT_EQ(seen.size(), 6u);  // compositions of 2 into 3 parts
}

TEST(Search, LexicographicFirstSolution) {
  SearchLimits limits;
  limits.lexicographic = true;
  std::vector<int64_t> first;
  SearchSolutions({3, 3}, {{{0, 1}, 3}}, limits, 0,
                  [&](const std::vector<int64_t>& x) {
                    first = x;
                    return false;
                  },
                  nullptr);
  EXPECT_EQ(first, (std::vector<int64_t>{0, 3}));
}

TEST(Search, NodeBudgetStops) {
  SearchLimits limits;
  limits.max_nodes = 3;
  limits.lp_max_free = 0;
  std::vector<int64_t> ub(12, 1);
  std::vector<int> all(12);
  for (int i = 0; i < 12; ++i) all[i] = i;
  const auto outcome = SearchSolutions(ub, {{all, 6}}, limits, 1,
                                       [](const std::vector<int64_t>&) { return true; }, nullptr);
  EXPECT_EQ(outcome, SearchOutcome::kBudgetExceeded);
}

TEST(Search, RelaxationPrunesParityConflicts) {
  // Odd cycle: only x = 1/2 satisfies it, so the relaxation passes and the
  // search finds nothing.
  Propagator p({1, 1, 1}, {{{0, 1}, 1}, {{1, 2}, 1}, {{0, 2}, 1}});
  EXPECT_TRUE(RelaxationFeasible(p));
  Propagator q({1, 1, 1}, {{{0, 1}, 2}, {{1, 2}, 0}, {{0, 2}, 1}});
  EXPECT_FALSE(RelaxationFeasible(q));
  bool found = false;
  SearchSolutions({1, 1, 1}, {{{0, 1}, 1}, {{1, 2}, 1}, {{0, 2}, 1}}, SearchLimits{}, 0,
                  [&](const std::vector<int64_t>&) {
                    found = true;
                    return false;
                  },
                  nullptr);
  EXPECT_FALSE(found);
}

}  // namespace
}  // namespace reconlab
