#pragma once

#include "maxtab/energy.hpp"
#include "maxtab/gaussian.hpp"
#include "maxtab/quality.hpp"
#include "maxtab/table.hpp"
#include "maxtab/transform.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace maxtab {

enum class OrderPolicy { automatic, order2_only, order4_only };
enum class ModelKind { order2, order4 };

struct RunConfig {
  std::uint64_t seed = 0;
  OrderPolicy order = OrderPolicy::automatic;
  double budget_seconds = 600;  // wall-clock training budget
  long window = 400;            // plateau window, in epochs
  long max_epochs = 0;          // 0 = no cap (budget and plateau still apply)
  std::size_t mc_points = 2000;
  SamplerConfig sampler;        // seed field is ignored; streams derive from `seed`
  std::size_t eval_row_cap = 5000;
  std::size_t max_pairs_per_epoch = 0;  // 0 = score every column pair each epoch
  IngestOptions ingest;
};

struct FittedModel {
  int format_version = 1;
  std::uint64_t seed = 0;
  ModelKind kind = ModelKind::order2;
  std::vector<ColumnSchema> schemas;        // every input column; dropped ones flagged
  std::vector<ColumnTransform> transforms;  // surviving columns, table order
  GaussianModel gaussian;
  std::optional<EnergyModel> energy;        // present only for order-4 models
  std::vector<EpochRecord> trace;           // training trace when training ran
  std::optional<double> order2_score;       // automatic selection diagnostics
  std::optional<double> order4_score;
  std::vector<std::string> warnings;
};

// Fits the closed-form second-order model and, unless the policy says
// otherwise, trains the fourth-order one; under the automatic policy the
// better-scoring of the two is kept (ties at three decimals go to order 2).
// A training abort falls back to order 2 with a warning.
FittedModel fit(const Table& training, const RunConfig& config = {});
FittedModel fit_csv(const std::string& csv_path, const RunConfig& config = {});

// Native-space synthetic rows. Categorical cells hold codes; write_csv with
// the model's surviving schemas (or decode_categorical) turns them into
// labels. Rows violating a sign constraint are resampled; if the retry cap is
// hit the table comes back short.
Table sample(const FittedModel& model, std::size_t n, std::uint64_t seed,
             const SamplerConfig& sampler = {});

struct EvaluateOptions {
  bool indistinguishability = false;
  bool dcr = false;
  std::uint64_t seed = 0;
  std::size_t row_cap = 5000;
  int n_splits = 50;
};

struct EvaluationReport {
  QualityReport quality;
  std::optional<IndistinguishabilityResult> indist;
  std::optional<DcrResult> dcr;
  std::size_t indist_synth_rows = 0;  // rows used after adapting to the half-size rule
};

// Scores two tables with matching column names; schemas are inferred from the
// real table. The indistinguishability check needs ceil(real rows / 2)
// synthetic rows; an oversized synthetic table is subsampled to fit.
EvaluationReport evaluate(const Table& real, const Table& synth,
                          const EvaluateOptions& options = {});

// Automatic order selection: order 4 must beat order 2 after rounding both
// scores to three decimals.
ModelKind select_order(double order2_score, double order4_score);

// Versioned JSON model files; loading and sampling reproduces the original
// model bit for bit.
std::string model_to_json(const FittedModel& model);
FittedModel model_from_json(const std::string& json_text);
void save_model(const FittedModel& model, const std::string& path);
FittedModel load_model(const std::string& path);

std::string report_to_json(const EvaluationReport& report);
std::string report_to_markdown(const EvaluationReport& report);
std::string trace_to_jsonl(const std::vector<EpochRecord>& trace);

}  // namespace maxtab
