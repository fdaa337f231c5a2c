#include "maxtab/quality.hpp"

#include "maxtab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

namespace maxtab {

namespace {

std::vector<double> drop_nan(const std::vector<double>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (double x : v)
    if (!std::isnan(x)) out.push_back(x);
  return out;
}

double overlap_from_counts(const std::vector<double>& real_counts,
                           const std::vector<double>& synth_counts, double n_real,
                           double n_synth) {
  double tv = 0;
  for (std::size_t i = 0; i < real_counts.size(); ++i)
    tv += std::abs(real_counts[i] / n_real - synth_counts[i] / n_synth);
  return std::clamp(1.0 - 0.5 * tv, 0.0, 1.0);
}

std::size_t equal_width_bin(double v, double lo, double hi, std::size_t n_bins) {
  if (hi <= lo) return 0;
  auto idx = static_cast<long long>((v - lo) / (hi - lo) * static_cast<double>(n_bins));
  return static_cast<std::size_t>(std::clamp<long long>(idx, 0, static_cast<long long>(n_bins) - 1));
}

}  // namespace

double histo_frac(const std::vector<double>& real, const std::vector<double>& synth) {
  std::vector<double> r = drop_nan(real);
  std::vector<double> s = drop_nan(synth);
  if (r.empty() || s.empty())
    throw std::invalid_argument("histo_frac needs non-empty vectors");

  std::set<double> real_unique(r.begin(), r.end());

  std::vector<double> rc, sc;
  if (real_unique.size() >= 10) {
    auto n_bins = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(r.size()))));
    double lo = std::min(*std::min_element(r.begin(), r.end()),
                         *std::min_element(s.begin(), s.end()));
    double hi = std::max(*std::max_element(r.begin(), r.end()),
                         *std::max_element(s.begin(), s.end()));
    if (hi <= lo) n_bins = 1;
    rc.assign(n_bins, 0);
    sc.assign(n_bins, 0);
    for (double v : r) ++rc[equal_width_bin(v, lo, hi, n_bins)];
    for (double v : s) ++sc[equal_width_bin(v, lo, hi, n_bins)];
  } else {
    std::set<double> uniques(real_unique);
    uniques.insert(s.begin(), s.end());
    std::map<double, std::size_t> bin;
    std::size_t k = 0;
    for (double v : uniques) bin[v] = k++;
    rc.assign(k, 0);
    sc.assign(k, 0);
    for (double v : r) ++rc[bin[v]];
    for (double v : s) ++sc[bin[v]];
  }
  return overlap_from_counts(rc, sc, static_cast<double>(r.size()), static_cast<double>(s.size()));
}

double bar_frac(const std::vector<std::pair<int, int>>& real,
                const std::vector<std::pair<int, int>>& synth) {
  if (real.empty() || synth.empty())
    throw std::invalid_argument("bar_frac needs non-empty vectors");
  std::map<std::pair<int, int>, double> rc, sc;
  for (const auto& p : real) ++rc[p];
  for (const auto& p : synth) ++sc[p];

  double tv = 0;
  const double nr = static_cast<double>(real.size());
  const double ns = static_cast<double>(synth.size());
  std::set<std::pair<int, int>> cells;
  for (const auto& [cell, cnt] : rc) cells.insert(cell);
  for (const auto& [cell, cnt] : sc) cells.insert(cell);
  for (const auto& cell : cells) {
    double dr = rc.count(cell) ? rc[cell] / nr : 0.0;
    double ds = sc.count(cell) ? sc[cell] / ns : 0.0;
    tv += std::abs(dr - ds);
  }
  return std::clamp(1.0 - 0.5 * tv, 0.0, 1.0);
}

double mixed_pair_score(const std::vector<int>& real_cats, const std::vector<double>& real_cont,
                        const std::vector<int>& synth_cats,
                        const std::vector<double>& synth_cont) {
  if (real_cats.size() != real_cont.size() || synth_cats.size() != synth_cont.size())
    throw std::invalid_argument("mixed_pair_score: column lengths differ");

  std::set<int> categories(real_cats.begin(), real_cats.end());
  double sum = 0;
  std::size_t scored = 0;
  for (int cat : categories) {
    std::vector<double> r, s;
    for (std::size_t i = 0; i < real_cats.size(); ++i)
      if (real_cats[i] == cat && !std::isnan(real_cont[i])) r.push_back(real_cont[i]);
    for (std::size_t i = 0; i < synth_cats.size(); ++i)
      if (synth_cats[i] == cat && !std::isnan(synth_cont[i])) s.push_back(synth_cont[i]);
    if (r.empty()) continue;  // category carries no usable real values
    ++scored;
    if (!s.empty()) sum += histo_frac(r, s);
  }
  return scored ? sum / static_cast<double>(scored) : 0.0;
}

std::optional<double> continuous_pair_score(const std::vector<double>& real_a,
                                            const std::vector<double>& real_b,
                                            const std::vector<double>& synth_a,
                                            const std::vector<double>& synth_b) {
  if (real_a.size() != real_b.size() || synth_a.size() != synth_b.size())
    throw std::invalid_argument("continuous_pair_score: column lengths differ");

  std::vector<std::pair<double, double>> r, s;
  for (std::size_t i = 0; i < real_a.size(); ++i)
    if (!std::isnan(real_a[i]) && !std::isnan(real_b[i])) r.emplace_back(real_a[i], real_b[i]);
  for (std::size_t i = 0; i < synth_a.size(); ++i)
    if (!std::isnan(synth_a[i]) && !std::isnan(synth_b[i])) s.emplace_back(synth_a[i], synth_b[i]);

  if (r.size() < 10) return std::nullopt;
  if (s.empty()) return 0.0;

  const auto n_bins = static_cast<std::size_t>(
      std::ceil(std::pow(static_cast<double>(r.size()), 0.25)));
  double alo = r.front().first, ahi = alo, blo = r.front().second, bhi = blo;
  for (const auto& [a, b] : r) {
    alo = std::min(alo, a); ahi = std::max(ahi, a);
    blo = std::min(blo, b); bhi = std::max(bhi, b);
  }
  for (const auto& [a, b] : s) {
    alo = std::min(alo, a); ahi = std::max(ahi, a);
    blo = std::min(blo, b); bhi = std::max(bhi, b);
  }

  std::vector<double> rc(n_bins * n_bins, 0), sc(n_bins * n_bins, 0);
  for (const auto& [a, b] : r)
    ++rc[equal_width_bin(a, alo, ahi, n_bins) * n_bins + equal_width_bin(b, blo, bhi, n_bins)];
  for (const auto& [a, b] : s)
    ++sc[equal_width_bin(a, alo, ahi, n_bins) * n_bins + equal_width_bin(b, blo, bhi, n_bins)];
  return overlap_from_counts(rc, sc, static_cast<double>(r.size()), static_cast<double>(s.size()));
}

namespace {

struct ScoreColumn {
  ColumnRole role = ColumnRole::continuous;
  std::vector<double> numeric;  // NaN = missing
  std::vector<int> cats;        // categorical id per row (missing is its own id)
};

// Categorical identity shared by both tables: codebook labels keep their
// codes, unseen keys get ids appended in sorted order so the result does not
// depend on row order.
struct CatDict {
  std::map<std::string, int> ids;
};

std::string key_for(const Cell& cell, const ColumnSchema& schema, bool codes) {
  if (codes && schema.role == ColumnRole::categorical && is_number(cell) &&
      !schema.codebook.empty()) {
    auto code = static_cast<long long>(std::llround(number_of(cell)));
    code = std::clamp<long long>(code, 0, static_cast<long long>(schema.codebook.size()) - 1);
    return schema.codebook[static_cast<std::size_t>(code)];
  }
  return cell_key(cell);
}

CatDict build_dict(const std::vector<Cell>& real, const std::vector<Cell>& synth,
                   const ColumnSchema& schema, bool codes) {
  CatDict dict;
  int next = 0;
  for (const auto& label : schema.codebook) dict.ids.emplace(label, next++);
  std::set<std::string> extra;
  for (const auto& c : real) extra.insert(key_for(c, schema, codes));
  for (const auto& c : synth) extra.insert(key_for(c, schema, codes));
  for (const auto& k : extra)
    if (!dict.ids.count(k)) dict.ids.emplace(k, next++);
  return dict;
}

ScoreColumn canonicalize(const std::vector<Cell>& col, const ColumnSchema& schema,
                         const CatDict& dict, bool codes) {
  ScoreColumn out;
  out.role = schema.role;
  if (schema.role == ColumnRole::categorical) {
    out.cats.reserve(col.size());
    for (const auto& c : col) out.cats.push_back(dict.ids.at(key_for(c, schema, codes)));
    out.numeric.reserve(col.size());
    for (int id : out.cats) out.numeric.push_back(static_cast<double>(id));
  } else {
    out.numeric.reserve(col.size());
    for (const auto& c : col)
      out.numeric.push_back(is_number(c) ? number_of(c)
                                         : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

Table select_rows(const Table& t, const std::vector<std::size_t>& rows) {
  Table out;
  out.column_names = t.column_names;
  out.columns.resize(t.n_cols());
  for (std::size_t j = 0; j < t.n_cols(); ++j) {
    out.columns[j].reserve(rows.size());
    for (std::size_t r : rows) out.columns[j].push_back(t.columns[j][r]);
  }
  return out;
}

Table cap_rows(const Table& t, std::size_t cap, std::mt19937_64& rng) {
  if (t.n_rows() <= cap) return t;
  std::vector<std::size_t> all(t.n_rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::vector<std::size_t> pick;
  pick.reserve(cap);
  std::sample(all.begin(), all.end(), std::back_inserter(pick), cap, rng);
  return select_rows(t, pick);
}

bool column_scorable(const ScoreColumn& c) {
  for (double v : c.numeric)
    if (!std::isnan(v)) return true;
  return false;
}

}  // namespace

QualityReport similarity_score(const Table& real, const Table& synth,
                               const std::vector<ColumnSchema>& schemas, std::uint64_t seed,
                               std::size_t row_cap, std::size_t max_pairs,
                               bool categorical_cells_are_codes) {
  const std::size_t d = real.n_cols();
  if (synth.n_cols() != d || schemas.size() != d)
    throw std::invalid_argument("similarity_score: tables and schemas differ in width");
  for (std::size_t j = 0; j < d; ++j)
    if (real.column_names[j] != synth.column_names[j])
      throw std::invalid_argument("similarity_score: column name mismatch at position " +
                                  std::to_string(j));
  if (real.n_rows() == 0 || synth.n_rows() == 0)
    throw std::invalid_argument("similarity_score: empty table");

  auto rng = make_rng(seed, Stream::subsample);
  Table real_c = cap_rows(real, row_cap, rng);
  Table synth_c = cap_rows(synth, row_cap, rng);

  std::vector<ScoreColumn> rcols(d), scols(d);
  for (std::size_t j = 0; j < d; ++j) {
    CatDict dict;
    if (schemas[j].role == ColumnRole::categorical)
      dict = build_dict(real_c.columns[j], synth_c.columns[j], schemas[j],
                        categorical_cells_are_codes);
    rcols[j] = canonicalize(real_c.columns[j], schemas[j], dict, categorical_cells_are_codes);
    scols[j] = canonicalize(synth_c.columns[j], schemas[j], dict, categorical_cells_are_codes);
  }

  QualityReport report;
  report.rows_scored_real = real_c.n_rows();
  report.rows_scored_synth = synth_c.n_rows();

  double sum_1d = 0;
  for (std::size_t j = 0; j < d; ++j) {
    double score = 0;
    if (column_scorable(rcols[j]) && column_scorable(scols[j]))
      score = histo_frac(rcols[j].numeric, scols[j].numeric);
    report.per_column.push_back({real.column_names[j], score});
    sum_1d += score;
  }
  report.mean_1d = sum_1d / static_cast<double>(d);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) pairs.emplace_back(i, j);
  if (max_pairs > 0 && pairs.size() > max_pairs) {
    std::vector<std::pair<std::size_t, std::size_t>> pick;
    pick.reserve(max_pairs);
    std::sample(pairs.begin(), pairs.end(), std::back_inserter(pick), max_pairs, rng);
    pairs = std::move(pick);
  }

  double sum_2d = 0;
  std::size_t scored_pairs = 0;
  for (auto [i, j] : pairs) {
    const std::string& na = real.column_names[i];
    const std::string& nb = real.column_names[j];
    const bool cat_i = rcols[i].role == ColumnRole::categorical;
    const bool cat_j = rcols[j].role == ColumnRole::categorical;
    if (cat_i && cat_j) {
      std::vector<std::pair<int, int>> rp, sp;
      for (std::size_t r = 0; r < real_c.n_rows(); ++r)
        rp.emplace_back(rcols[i].cats[r], rcols[j].cats[r]);
      for (std::size_t r = 0; r < synth_c.n_rows(); ++r)
        sp.emplace_back(scols[i].cats[r], scols[j].cats[r]);
      double score = bar_frac(rp, sp);
      report.per_pair.push_back({na, nb, "bar-frac", score});
      sum_2d += score;
      ++scored_pairs;
    } else if (cat_i || cat_j) {
      std::size_t cat = cat_i ? i : j;
      std::size_t num = cat_i ? j : i;
      double score = mixed_pair_score(rcols[cat].cats, rcols[num].numeric, scols[cat].cats,
                                      scols[num].numeric);
      report.per_pair.push_back({na, nb, "mixed", score});
      sum_2d += score;
      ++scored_pairs;
    } else {
      auto score = continuous_pair_score(rcols[i].numeric, rcols[j].numeric, scols[i].numeric,
                                         scols[j].numeric);
      if (score) {
        report.per_pair.push_back({na, nb, "eden-substitute", *score});
        sum_2d += *score;
        ++scored_pairs;
      } else {
        report.skipped_pairs.push_back({na, nb, "fewer than 10 jointly observed real rows"});
      }
    }
  }

  if (scored_pairs) {
    report.has_pair_scores = true;
    report.mean_2d = sum_2d / static_cast<double>(scored_pairs);
    report.overall = 0.5 * (report.mean_1d + report.mean_2d);
  } else {
    report.overall = report.mean_1d;
  }
  return report;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  double h = (static_cast<double>(values.size()) - 1.0) * p / 100.0;
  auto lo = static_cast<std::size_t>(std::floor(h));
  auto hi = std::min(lo + 1, values.size() - 1);
  double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

IndistinguishabilityResult indistinguishability_test(const Table& real, const Table& synth,
                                                     const std::vector<ColumnSchema>& schemas,
                                                     int n_splits, std::uint64_t seed,
                                                     bool categorical_cells_are_codes) {
  const std::size_t n = real.n_rows();
  if (n < 60)
    throw std::invalid_argument("indistinguishability_test needs at least 60 real rows");
  const std::size_t expected = (n + 1) / 2;
  if (synth.n_rows() != expected)
    throw std::invalid_argument("indistinguishability_test needs exactly " +
                                std::to_string(expected) + " synthetic rows, got " +
                                std::to_string(synth.n_rows()));
  if (n_splits < 1) throw std::invalid_argument("n_splits must be positive");

  auto rng = make_rng(seed, Stream::indistinguishability);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;

  IndistinguishabilityResult result;
  for (int s = 0; s < n_splits; ++s) {
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<std::size_t> a(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(expected));
    std::vector<std::size_t> b(idx.begin() + static_cast<std::ptrdiff_t>(expected), idx.end());
    Table ta = select_rows(real, a);
    Table tb = select_rows(real, b);
    result.split_scores.push_back(
        similarity_score(ta, tb, schemas, rng(), 5000, 0, categorical_cells_are_codes).overall);
  }

  std::shuffle(idx.begin(), idx.end(), rng);
  result.comparison_rows.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(expected));
  Table half = select_rows(real, result.comparison_rows);
  result.synthetic_score =
      similarity_score(half, synth, schemas, rng(), 5000, 0, categorical_cells_are_codes).overall;

  result.p5 = percentile(result.split_scores, 5.0);
  result.p95 = percentile(result.split_scores, 95.0);
  if (result.synthetic_score < result.p5)
    result.verdict = "below-range";
  else if (result.synthetic_score > result.p95)
    result.verdict = "above-range(overfit)";
  else
    result.verdict = "indistinguishable";

  std::size_t at_or_below = 0;
  for (double s : result.split_scores)
    if (s <= result.synthetic_score) ++at_or_below;
  result.p_value = static_cast<double>(at_or_below) / static_cast<double>(n_splits);
  return result;
}

DcrResult dcr_score(const Table& real, const Table& synth,
                    const std::vector<ColumnSchema>& schemas, std::uint64_t seed,
                    bool categorical_cells_are_codes) {
  const std::size_t d = real.n_cols();
  if (synth.n_cols() != d || schemas.size() != d)
    throw std::invalid_argument("dcr_score: tables and schemas differ in width");
  if (real.n_rows() == 0 || synth.n_rows() == 0)
    throw std::invalid_argument("dcr_score: empty table");

  std::vector<ScoreColumn> rcols(d), scols(d);
  std::vector<CatDict> dicts(d);
  for (std::size_t j = 0; j < d; ++j) {
    if (schemas[j].role == ColumnRole::categorical)
      dicts[j] = build_dict(real.columns[j], synth.columns[j], schemas[j],
                            categorical_cells_are_codes);
    rcols[j] = canonicalize(real.columns[j], schemas[j], dicts[j], categorical_cells_are_codes);
    scols[j] = canonicalize(synth.columns[j], schemas[j], dicts[j], categorical_cells_are_codes);
  }

  std::vector<double> lo(d, 0), hi(d, 0), range(d, 0);
  for (std::size_t j = 0; j < d; ++j) {
    if (rcols[j].role == ColumnRole::categorical) continue;
    bool any = false;
    for (double v : rcols[j].numeric) {
      if (std::isnan(v)) continue;
      if (!any) {
        lo[j] = hi[j] = v;
        any = true;
      } else {
        lo[j] = std::min(lo[j], v);
        hi[j] = std::max(hi[j], v);
      }
    }
    range[j] = any ? hi[j] - lo[j] : 0.0;
  }

  auto row_distance = [&](const std::vector<ScoreColumn>& a_cols, std::size_t ra,
                          const std::vector<ScoreColumn>& b_cols, std::size_t rb) {
    double sum = 0;
    for (std::size_t j = 0; j < d; ++j) {
      if (a_cols[j].role == ColumnRole::categorical) {
        sum += a_cols[j].cats[ra] == b_cols[j].cats[rb] ? 0.0 : 1.0;
        continue;
      }
      double a = a_cols[j].numeric[ra];
      double b = b_cols[j].numeric[rb];
      bool an = std::isnan(a), bn = std::isnan(b);
      if (an && bn) continue;
      if (an || bn) {
        sum += 1.0;
        continue;
      }
      if (range[j] <= 0)
        sum += a == b ? 0.0 : 1.0;
      else
        sum += std::abs(a - b) / range[j];
    }
    return sum / static_cast<double>(d);
  };

  auto closest = [&](const std::vector<ScoreColumn>& cols, std::size_t r) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t rr = 0; rr < real.n_rows(); ++rr)
      best = std::min(best, row_distance(cols, r, rcols, rr));
    return best;
  };

  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };

  std::vector<double> synth_dcr(synth.n_rows());
  for (std::size_t r = 0; r < synth.n_rows(); ++r) synth_dcr[r] = closest(scols, r);

  // Uniform baseline over the observed native domain of each real column.
  auto rng = make_rng(seed, Stream::dcr);
  std::vector<std::vector<int>> observed_ids(d);
  for (std::size_t j = 0; j < d; ++j) {
    if (rcols[j].role != ColumnRole::categorical) continue;
    std::set<int> ids(rcols[j].cats.begin(), rcols[j].cats.end());
    observed_ids[j].assign(ids.begin(), ids.end());
  }
  std::vector<ScoreColumn> bcols(d);
  for (std::size_t j = 0; j < d; ++j) {
    bcols[j].role = rcols[j].role;
    bcols[j].numeric.resize(synth.n_rows());
    if (bcols[j].role == ColumnRole::categorical) bcols[j].cats.resize(synth.n_rows());
  }
  for (std::size_t r = 0; r < synth.n_rows(); ++r) {
    for (std::size_t j = 0; j < d; ++j) {
      if (bcols[j].role == ColumnRole::categorical) {
        std::uniform_int_distribution<std::size_t> pick(0, observed_ids[j].size() - 1);
        int id = observed_ids[j][pick(rng)];
        bcols[j].cats[r] = id;
        bcols[j].numeric[r] = static_cast<double>(id);
      } else if (range[j] <= 0) {
        bcols[j].numeric[r] = lo[j];
      } else if (rcols[j].role == ColumnRole::integer_valued) {
        std::uniform_int_distribution<long long> pick(static_cast<long long>(std::llround(lo[j])),
                                                      static_cast<long long>(std::llround(hi[j])));
        bcols[j].numeric[r] = static_cast<double>(pick(rng));
      } else {
        std::uniform_real_distribution<double> pick(lo[j], hi[j]);
        bcols[j].numeric[r] = pick(rng);
      }
    }
  }
  std::vector<double> random_dcr(synth.n_rows());
  for (std::size_t r = 0; r < synth.n_rows(); ++r) random_dcr[r] = closest(bcols, r);

  DcrResult result;
  result.median_dcr_synth = median(synth_dcr);
  result.median_dcr_random = median(random_dcr);
  if (result.median_dcr_random <= 0)
    throw std::runtime_error("dcr_score: the random baseline has zero median distance");
  result.score = std::min(1.0, result.median_dcr_synth / result.median_dcr_random);
  return result;
}

}  // namespace maxtab
