#pragma once

#include "maxtab/table.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace maxtab {

// Overlap of two binned densities: 1 - total variation distance. Shared
// equal-width bins over the union range, ceil(sqrt(n_real)) of them when the
// real vector has at least ten distinct values, otherwise one bin per
// distinct value. NaN entries are ignored.
double histo_frac(const std::vector<double>& real, const std::vector<double>& synth);

// Same overlap over joint category frequencies.
double bar_frac(const std::vector<std::pair<int, int>>& real,
                const std::vector<std::pair<int, int>>& synth);

// Mean histo_frac of the continuous column conditioned on each category seen
// in the real data; categories with no synthetic rows contribute zero.
double mixed_pair_score(const std::vector<int>& real_cats, const std::vector<double>& real_cont,
                        const std::vector<int>& synth_cats,
                        const std::vector<double>& synth_cont);

// Two-dimensional binned density overlap with ceil(n^(1/4)) bins per axis.
// Returns nothing when fewer than ten real rows are jointly observed.
std::optional<double> continuous_pair_score(const std::vector<double>& real_a,
                                            const std::vector<double>& real_b,
                                            const std::vector<double>& synth_a,
                                            const std::vector<double>& synth_b);

struct QualityReport {
  struct ColumnScore {
    std::string name;
    double score = 0;
  };
  struct PairScore {
    std::string col_a, col_b;
    std::string kind;  // "bar-frac", "mixed" or "eden-substitute"
    double score = 0;
  };
  struct SkippedPair {
    std::string col_a, col_b;
    std::string reason;
  };
  std::vector<ColumnScore> per_column;
  std::vector<PairScore> per_pair;
  std::vector<SkippedPair> skipped_pairs;
  double mean_1d = 0;
  double mean_2d = 0;
  double overall = 0;        // (mean_1d + mean_2d) / 2, or mean_1d with no pairs
  bool has_pair_scores = false;
  std::size_t rows_scored_real = 0;
  std::size_t rows_scored_synth = 0;
};

// Column-wise and pair-wise overlap scores between two tables with identical
// column names. Tables larger than row_cap are first reduced to a seeded
// uniform row sample. Set categorical_cells_are_codes when categorical cells
// hold integer codes into the schema codebook rather than labels.
QualityReport similarity_score(const Table& real, const Table& synth,
                               const std::vector<ColumnSchema>& schemas, std::uint64_t seed,
                               std::size_t row_cap = 5000, std::size_t max_pairs = 0,
                               bool categorical_cells_are_codes = false);

struct IndistinguishabilityResult {
  std::vector<double> split_scores;  // half-vs-half reference scores
  double p5 = 0;
  double p95 = 0;
  double synthetic_score = 0;
  std::string verdict;  // "below-range", "indistinguishable", "above-range(overfit)"
  double p_value = 0;   // fraction of split scores <= synthetic score
  std::vector<std::size_t> comparison_rows;  // real rows scored against synth
};

// Requires at least 60 real rows and exactly ceil(real rows / 2) synthetic
// rows. Splits the real table in half n_splits times to build the reference
// score range, then places the synthetic score against its 5th-95th
// percentile band.
IndistinguishabilityResult indistinguishability_test(const Table& real, const Table& synth,
                                                     const std::vector<ColumnSchema>& schemas,
                                                     int n_splits, std::uint64_t seed,
                                                     bool categorical_cells_are_codes = false);

struct DcrResult {
  double median_dcr_synth = 0;
  double median_dcr_random = 0;
  double score = 0;  // min(1, median_synth / median_random)
};

// Distance to the closest real record, with per-column distances of
// |delta| / range for numeric columns and 0/1 for categorical ones, compared
// against a uniform random baseline over the observed domain.
DcrResult dcr_score(const Table& real, const Table& synth,
                    const std::vector<ColumnSchema>& schemas, std::uint64_t seed,
                    bool categorical_cells_are_codes = false);

// Linear-interpolation percentile of a sample, p in [0, 100].
double percentile(std::vector<double> values, double p);

}  // namespace maxtab
