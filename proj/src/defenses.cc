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

#include "reconlab/defenses.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "reconlab/csv.h"
#include "reconlab/parallel.h"
#include "reconlab/rng.h"

namespace reconlab {
namespace {

std::string ScopeKey(const Geocode& g, SwapScope scope) {
  switch (scope) {
    case SwapScope::kTract: return g.tract_code();
    case SwapScope::kCounty: return g.tract_code().substr(0, 5);
    case SwapScope::kState: return g.tract_code().substr(0, 2);
  }
  return {};
}

struct Household {
  std::vector<size_t> members;
  Geocode block;
  bool has_unique = false;
};

int64_t Draw(Rng& rng, NoiseFamily family, double scale) {
  if (scale <= 0.0) return 0;
  if (family == NoiseFamily::kGeometric) return rng.TwoSidedGeometric(std::exp(-1.0 / scale));
  return rng.DiscreteGaussian(scale);
}

constexpr int kSexAgeCells = 2 * kNumAges;

// Integer table with row sums a and column sums b (equal totals), close to
// the real matrix m (rows x cols, row-major).
std::vector<int64_t> RoundToMargins(const std::vector<double>& m, size_t rows, size_t cols,
                                    const std::vector<int64_t>& a, const std::vector<int64_t>& b) {
  std::vector<int64_t> x(m.size());
  std::vector<int64_t> rdef(a), cdef(b);
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < cols; ++j) {
      const int64_t f = static_cast<int64_t>(std::floor(std::max(0.0, m[i * cols + j])));
      const int64_t v = std::min({f, rdef[i], cdef[j]});
      x[i * cols + j] = v;
      rdef[i] -= v;
      cdef[j] -= v;
    }
  }
  std::vector<size_t> order(m.size());
  std::iota(order.begin(), order.end(), 0);
  auto frac = [&](size_t k) { return m[k] - static_cast<double>(x[k]); };
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t p, size_t q) { return frac(p) > frac(q); });
  for (size_t k : order) {
    const size_t i = k / cols, j = k % cols;
    if (rdef[i] > 0 && cdef[j] > 0 && frac(k) > 0.0) {
      ++x[k];
      --rdef[i];
      --cdef[j];
    }
  }
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < cols && rdef[i] > 0; ++j) {
      const int64_t v = std::min(rdef[i], cdef[j]);
      x[i * cols + j] += v;
      rdef[i] -= v;
      cdef[j] -= v;
    }
  }
  return x;
}

std::vector<PersonRecord> NoiseBlock(const Geocode& block, const std::vector<PersonRecord>& people,
                                     const NoiseConfig& cfg, Rng& rng) {
  const int64_t n = static_cast<int64_t>(people.size());
  if (n == 0) return {};
  std::vector<double> sex_age(kSexAgeCells, 0.0), race_eth(kNumRaceEth, 0.0);
  std::map<std::pair<int, int>, int64_t> detail;
  for (const PersonRecord& p : people) {
    if (!p.has_age()) throw std::invalid_argument("noise defense needs single-year ages");
    const int sa = static_cast<int>(p.sex) * kNumAges + p.age;
    sex_age[sa] += 1;
    race_eth[p.race_eth()] += 1;
    ++detail[{sa, p.race_eth()}];
  }
  for (double& v : sex_age) v += static_cast<double>(Draw(rng, cfg.family, cfg.sex_age_scale));
  for (double& v : race_eth) v += static_cast<double>(Draw(rng, cfg.family, cfg.race_eth_scale));
  const auto a_all = RoundToTotal(ProjectToSimplex(sex_age, static_cast<double>(n)), n);
  const auto b_all = RoundToTotal(ProjectToSimplex(race_eth, static_cast<double>(n)), n);

  std::vector<int> rows, cols;
  std::vector<int64_t> a, b;
  for (int i = 0; i < kSexAgeCells; ++i)
    if (a_all[i] > 0) rows.push_back(i), a.push_back(a_all[i]);
  for (int j = 0; j < kNumRaceEth; ++j)
    if (b_all[j] > 0) cols.push_back(j), b.push_back(b_all[j]);

  // Detail noise is drawn only on the support of the rounded marginals.
  const size_t R = rows.size(), C = cols.size();
  const double eps = cfg.exact() ? 0.0 : 1e-3;
  std::vector<double> m(R * C);
  for (size_t i = 0; i < R; ++i) {
    for (size_t j = 0; j < C; ++j) {
      auto it = detail.find({rows[i], cols[j]});
      const double exact = it == detail.end() ? 0.0 : static_cast<double>(it->second);
      const double noisy = exact + static_cast<double>(Draw(rng, cfg.family, cfg.detail_scale));
      m[i * C + j] = std::max(0.0, noisy) + eps;
    }
  }
  for (int iter = 0; iter < 200; ++iter) {
    for (size_t i = 0; i < R; ++i) {
      double s = 0.0;
      for (size_t j = 0; j < C; ++j) s += m[i * C + j];
      if (s > 0)
        for (size_t j = 0; j < C; ++j) m[i * C + j] *= static_cast<double>(a[i]) / s;
    }
    double worst = 0.0;
    for (size_t j = 0; j < C; ++j) {
      double s = 0.0;
      for (size_t i = 0; i < R; ++i) s += m[i * C + j];
      worst = std::max(worst, std::abs(s - static_cast<double>(b[j])));
      if (s > 0)
        for (size_t i = 0; i < R; ++i) m[i * C + j] *= static_cast<double>(b[j]) / s;
    }
    if (worst < 1e-9) break;
  }
  const auto x = RoundToMargins(m, R, C, a, b);

  std::vector<PersonRecord> out;
  out.reserve(static_cast<size_t>(n));
  for (size_t i = 0; i < R; ++i) {
    const Sex sex = rows[i] >= kNumAges ? Sex::kFemale : Sex::kMale;
    const int age = rows[i] % kNumAges;
    for (size_t j = 0; j < C; ++j) {
      const int cell = cols[j];
      for (int64_t k = 0; k < x[i * C + j]; ++k)
        out.push_back(PersonRecord::Make(0, 0, block, sex, age, RaceOfCell(cell), EthOfCell(cell)));
    }
  }
  return out;
}

}  // namespace

std::string_view SwapScopeName(SwapScope s) {
  switch (s) {
    case SwapScope::kTract: return "tract";
    case SwapScope::kCounty: return "county";
    case SwapScope::kState: return "state";
  }
  return "tract";
}

SwapScope ParseSwapScope(std::string_view s) {
  if (s == "tract") return SwapScope::kTract;
  if (s == "county") return SwapScope::kCounty;
  if (s == "state") return SwapScope::kState;
  throw std::invalid_argument("unknown swap scope: " + std::string(s));
}

std::string_view SwapSelectionName(SwapSelection s) {
  return s == SwapSelection::kUniform ? "uniform" : "target-unique";
}

SwapSelection ParseSwapSelection(std::string_view s) {
  if (s == "uniform") return SwapSelection::kUniform;
  if (s == "target-unique") return SwapSelection::kTargetUnique;
  throw std::invalid_argument("unknown swap selection: " + std::string(s));
}

void SwapConfig::Validate() const {
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("swap rate must lie in [0, 1]");
}

SwapResult SwapDefense(const std::vector<PersonRecord>& pop, const SwapConfig& cfg) {
  cfg.Validate();
  SwapResult result{pop, {}};

  std::map<std::tuple<Geocode, Sex, uint8_t>, int> frame;
  for (const PersonRecord& p : pop) ++frame[{p.block, p.sex, p.agebin}];

  std::vector<Household> households;
  std::map<uint64_t, size_t> by_hid;
  for (size_t i = 0; i < pop.size(); ++i) {
    const PersonRecord& p = pop[i];
    size_t h;
    auto it = p.hid == 0 ? by_hid.end() : by_hid.find(p.hid);
    if (it == by_hid.end()) {
      h = households.size();
      households.push_back(Household{{}, p.block, false});
      if (p.hid != 0) by_hid.emplace(p.hid, h);
    } else {
      h = it->second;
      if (households[h].block != p.block)
        throw std::invalid_argument("household spans blocks: " + std::to_string(p.hid));
    }
    households[h].members.push_back(i);
    if (frame[{p.block, p.sex, p.agebin}] == 1) households[h].has_unique = true;
  }

  SwapReport& rep = result.report;
  rep.households = static_cast<int64_t>(households.size());
  rep.pairs_requested = std::llround(cfg.rate * static_cast<double>(households.size()) / 2.0);
  if (rep.pairs_requested == 0) return result;

  std::vector<size_t> order(households.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed);
  rng.Shuffle(order);
  if (cfg.selection == SwapSelection::kTargetUnique) {
    std::stable_partition(order.begin(), order.end(),
                          [&](size_t h) { return households[h].has_unique; });
  }

  std::vector<std::pair<size_t, size_t>> pairs;
  std::map<std::pair<std::string, size_t>, std::vector<size_t>> waiting;
  auto take_partner = [&](std::vector<size_t>& pool, size_t h) -> std::optional<size_t> {
    for (size_t k = 0; k < pool.size(); ++k) {
      if (households[pool[k]].block != households[h].block) {
        const size_t partner = pool[k];
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
        return partner;
      }
    }
    return std::nullopt;
  };
  for (size_t h : order) {
    if (static_cast<int64_t>(pairs.size()) == rep.pairs_requested) break;
    auto& pool = waiting[{ScopeKey(households[h].block, cfg.scope), households[h].members.size()}];
    if (auto partner = take_partner(pool, h)) {
      pairs.emplace_back(*partner, h);
    } else {
      pool.push_back(h);
    }
  }
  if (static_cast<int64_t>(pairs.size()) < rep.pairs_requested) {
    // Cross-size fallback within each scope, visiting waiting households in
    // scope and size order.
    std::map<std::string, std::vector<size_t>> by_scope;
    for (auto& [key, pool] : waiting)
      for (size_t h : pool) by_scope[key.first].push_back(h);
    for (auto& [scope, pool] : by_scope) {
      while (static_cast<int64_t>(pairs.size()) < rep.pairs_requested && pool.size() >= 2) {
        const size_t h = pool.front();
        pool.erase(pool.begin());
        if (auto partner = take_partner(pool, h)) {
          pairs.emplace_back(h, *partner);
          ++rep.cross_size_pairs;
        }
      }
    }
  }
  for (auto [h1, h2] : pairs) {
    const Geocode b1 = households[h1].block, b2 = households[h2].block;
    for (size_t i : households[h1].members) result.records[i].block = b2;
    for (size_t i : households[h2].members) result.records[i].block = b1;
  }
  rep.pairs_swapped = static_cast<int64_t>(pairs.size());
  rep.households_moved = 2 * rep.pairs_swapped;
  rep.unpaired = rep.pairs_requested - rep.pairs_swapped;
  return result;
}

std::string_view NoiseFamilyName(NoiseFamily f) {
  return f == NoiseFamily::kGeometric ? "geometric" : "discrete-gaussian";
}

NoiseFamily ParseNoiseFamily(std::string_view s) {
  if (s == "geometric") return NoiseFamily::kGeometric;
  if (s == "discrete-gaussian") return NoiseFamily::kDiscreteGaussian;
  throw std::invalid_argument("unknown noise family: " + std::string(s));
}

void NoiseConfig::Validate() const {
  for (double s : {sex_age_scale, race_eth_scale, detail_scale}) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("noise scales must be >= 0");
  }
}

std::vector<double> ProjectToSimplex(const std::vector<double>& v, double total) {
  if (v.empty()) return {};
  std::vector<double> sorted(v);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cum = 0.0, tau = 0.0;
  for (size_t k = 0; k < sorted.size(); ++k) {
    cum += sorted[k];
    const double t = (cum - total) / static_cast<double>(k + 1);
    if (sorted[k] - t > 0) tau = t;
  }
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = std::max(0.0, v[i] - tau);
  return out;
}

std::vector<int64_t> RoundToTotal(const std::vector<double>& v, int64_t total) {
  std::vector<int64_t> out(v.size());
  int64_t sum = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<int64_t>(std::floor(std::max(0.0, v[i])));
    sum += out[i];
  }
  std::vector<size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  auto frac = [&](size_t i) { return std::max(0.0, v[i]) - static_cast<double>(out[i]); };
  if (sum < total) {
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return frac(a) > frac(b); });
    for (size_t k = 0; sum < total; k = (k + 1) % order.size()) {
      ++out[order[k]];
      ++sum;
    }
  } else if (sum > total) {
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return frac(a) < frac(b); });
    for (size_t k = 0; sum > total; k = (k + 1) % order.size()) {
      if (out[order[k]] == 0) continue;
      --out[order[k]];
      --sum;
    }
  }
  return out;
}

NoiseResult NoiseDefense(const std::vector<PersonRecord>& pop, const GeoUniverse& universe,
                         const NoiseConfig& cfg, uint64_t seed, int jobs) {
  cfg.Validate();
  std::vector<std::vector<PersonRecord>> by_block(universe.size());
  for (const PersonRecord& p : pop) {
    const int64_t b = universe.IndexOf(p.block);
    if (b < 0) throw std::invalid_argument("record outside the universe: " + p.block.str());
    by_block[static_cast<size_t>(b)].push_back(p);
  }
  std::vector<std::vector<PersonRecord>> noisy(universe.size());
  ParallelFor(universe.size(), jobs, [&](size_t b) {
    Rng rng(DeriveSeed(seed, static_cast<uint64_t>(b)));
    noisy[b] = NoiseBlock(universe.block(b), by_block[b], cfg, rng);
  });
  NoiseResult result;
  for (auto& v : noisy) result.records.insert(result.records.end(), v.begin(), v.end());
  result.bundle = Tabulate(result.records, universe, AllTableNames());
  return result;
}

void SuppressConfig::Validate() const {
  if (threshold < 2) throw std::invalid_argument("suppression threshold must be >= 2");
}

SuppressResult SuppressDefense(const TableBundle& bundle, const SuppressConfig& cfg) {
  cfg.Validate();
  const Schema& schema = bundle.schema();
  SuppressResult result{bundle, {}};
  result.report.resize(schema.tables().size());
  for (size_t t = 0; t < schema.tables().size(); ++t) {
    result.report[t].table = schema.table(t).name;
    result.report[t].geo_level = std::string(GeoLevelName(schema.table(t).level));
  }
  const auto p1 = schema.Find("P1");
  for (const auto& [geo, tables] : bundle.geos()) {
    for (size_t t = 0; t < tables.size(); ++t) {
      const auto& cells = tables[t];
      if (cells.empty()) continue;
      const TableDef& def = schema.table(t);
      int64_t universe_count;
      if (def.total_cell >= 0) {
        universe_count = cells[def.total_cell];
      } else if (p1 && t != *p1 && bundle.Find(geo, *p1) != nullptr) {
        universe_count = (*bundle.Find(geo, *p1))[0];
      } else {
        universe_count = cells[0];
      }
      SuppressionRow& row = result.report[t];
      ++row.tables_total;
      row.cells_total += static_cast<int64_t>(cells.size());
      auto& out = result.bundle.Mutable(geo, t);
      const bool whole =
          cfg.whole_table && universe_count != kSuppressed && universe_count < cfg.threshold;
      if (whole) ++row.tables_suppressed;
      for (size_t c = 0; c < cells.size(); ++c) {
        if (cells[c] == kSuppressed) {
          ++row.cells_suppressed;
        } else if (whole || (cells[c] >= 1 && cells[c] < cfg.threshold)) {
          out[c] = kSuppressed;
          ++row.cells_suppressed;
        }
      }
    }
  }
  return result;
}

void WriteSuppressionReport(const std::vector<SuppressionRow>& rows,
                            const std::filesystem::path& path) {
  CsvWriter w(path);
  w.Row({"table", "geo_level", "cells_total", "cells_suppressed", "tables_suppressed"});
  for (const SuppressionRow& r : rows) {
    w.Row({r.table, r.geo_level, std::to_string(r.cells_total), std::to_string(r.cells_suppressed),
           std::to_string(r.tables_suppressed)});
  }
}

}  // namespace reconlab
