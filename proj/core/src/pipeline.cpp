#include "maxtab/pipeline.hpp"

#include "maxtab/postprocess.hpp"
#include "maxtab/rng.hpp"
#include "maxtab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace maxtab {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::vector<double> numeric_column(const Table& table, std::size_t col) {
  std::vector<double> out(table.n_rows(), kNan);
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    const Cell& c = table.columns[col][r];
    if (is_number(c)) out[r] = number_of(c);
  }
  return out;
}

Table select_rows(const Table& table, const std::vector<std::size_t>& rows) {
  Table out;
  out.column_names = table.column_names;
  out.columns.resize(table.n_cols());
  for (std::size_t j = 0; j < table.n_cols(); ++j) {
    out.columns[j].reserve(rows.size());
    for (std::size_t r : rows) out.columns[j].push_back(table.columns[j][r]);
  }
  return out;
}

}  // namespace

ModelKind select_order(double order2_score, double order4_score) {
  // Ties at three decimals keep the cheaper closed-form model.
  long s2 = std::lround(order2_score * 1000.0);
  long s4 = std::lround(order4_score * 1000.0);
  return s4 > s2 ? ModelKind::order4 : ModelKind::order2;
}

FittedModel fit(const Table& training, const RunConfig& config) {
  if (training.n_cols() == 0) throw std::invalid_argument("training table has no columns");
  if (training.n_rows() < 2) throw std::invalid_argument("training table needs at least two rows");

  FittedModel model;
  model.seed = config.seed;
  auto [encoded, schemas] = encode_and_prune(training, infer_schema(training));
  model.schemas = schemas;
  const std::vector<ColumnSchema> survivors = surviving_schemas(schemas);

  // Original column positions drive the jitter streams, so dropping a column
  // does not reshuffle the randomness of the ones that remain.
  std::vector<std::size_t> original_index;
  for (std::size_t j = 0; j < schemas.size(); ++j)
    if (!schemas[j].dropped) original_index.push_back(j);

  const std::size_t n = encoded.n_rows();
  const std::size_t d = encoded.n_cols();
  Eigen::MatrixXd data(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  model.transforms.reserve(d);
  for (std::size_t j = 0; j < d; ++j) {
    auto rng = make_rng(config.seed, Stream::jitter, original_index[j]);
    FitForwardResult fwd = fit_forward(numeric_column(encoded, j), rng);
    model.transforms.push_back(std::move(fwd.state));
    for (std::size_t r = 0; r < n; ++r)
      data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = fwd.transformed[r];
  }

  model.gaussian = fit_gaussian(data);

  Ellipsoid support;
  support.center = model.gaussian.mean;
  support.covariance = model.gaussian.covariance;
  support.mahalanobis_sq_cutoff = config.sampler.mahalanobis_sq_cutoff;
  support.finalize();

  // Scores a transformed-space sample against the encoded training table.
  auto score_sample = [&](std::uint64_t seed, const Eigen::MatrixXd& sample) {
    Table native = to_native(sample, model.transforms, survivors);
    return similarity_score(encoded, native, survivors, seed, config.eval_row_cap,
                            config.max_pairs_per_epoch, /*categorical_cells_are_codes=*/true)
        .overall;
  };

  bool trained = false;
  TrainResult tr;
  if (config.order != OrderPolicy::order2_only) {
    TrainConfig tc;
    tc.sampler = config.sampler;
    tc.budget_seconds = config.budget_seconds;
    tc.window = config.window;
    tc.max_epochs = config.max_epochs;
    tc.mc_points = config.mc_points;
    tc.seed = config.seed;
    try {
      tr = train(data, support, tc, [&](long epoch, const Eigen::MatrixXd& sample) {
        return score_sample(mix_seed(config.seed, static_cast<std::uint64_t>(Stream::epoch_score),
                                     static_cast<std::uint64_t>(epoch)),
                            sample);
      });
      trained = true;
      model.trace = tr.trace;
    } catch (const TrainingAbort& abort) {
      model.warnings.push_back(std::string("fourth-order training aborted (") + abort.what() +
                               "); keeping the second-order model");
    }
  }

  if (!trained) {
    model.kind = ModelKind::order2;
    return model;
  }
  if (config.order == OrderPolicy::order4_only) {
    model.kind = ModelKind::order4;
    model.energy = std::move(tr.model);
    return model;
  }

  // Automatic policy: draw one comparison sample from each model and keep the
  // better scorer.
  const std::size_t n_cmp = std::min(n, config.eval_row_cap);
  auto gauss_rng = make_rng(config.seed, Stream::selection, 2);
  Eigen::MatrixXd gauss_draw = sample_gaussian(model.gaussian, n_cmp, gauss_rng);
  double s2 = score_sample(mix_seed(config.seed, static_cast<std::uint64_t>(Stream::selection), 12),
                           gauss_draw);

  SamplerConfig mh_cfg = config.sampler;
  mh_cfg.seed = mix_seed(config.seed, static_cast<std::uint64_t>(Stream::selection), 4);
  MhResult mh = mh_sample(tr.model, mh_cfg, n_cmp);
  double s4 = score_sample(mix_seed(config.seed, static_cast<std::uint64_t>(Stream::selection), 14),
                           mh.sample);

  model.order2_score = s2;
  model.order4_score = s4;
  model.kind = select_order(s2, s4);
  if (model.kind == ModelKind::order4) model.energy = std::move(tr.model);
  return model;
}

FittedModel fit_csv(const std::string& csv_path, const RunConfig& config) {
  return fit(load_csv(csv_path, config.ingest), config);
}

Table sample(const FittedModel& model, std::size_t n, std::uint64_t seed,
             const SamplerConfig& sampler) {
  const std::vector<ColumnSchema> survivors = surviving_schemas(model.schemas);
  if (survivors.size() != model.transforms.size())
    throw std::runtime_error("model schemas and transform states disagree");
  if (n == 0) {
    Table empty;
    for (const ColumnSchema& s : survivors) empty.column_names.push_back(s.name);
    empty.columns.resize(survivors.size());
    return empty;
  }

  Resampler draw;
  auto gauss_rng = make_rng(seed, Stream::gaussian_draw);
  if (model.kind == ModelKind::order2) {
    draw = [&](std::size_t k) {
      return to_native(sample_gaussian(model.gaussian, k, gauss_rng), model.transforms, survivors);
    };
  } else {
    if (!model.energy) throw std::runtime_error("fourth-order model carries no energy term");
    draw = [&model, &sampler, seed, &survivors, round = std::uint64_t(0)](std::size_t k) mutable {
      SamplerConfig cfg = sampler;
      cfg.seed = mix_seed(seed, static_cast<std::uint64_t>(Stream::resample), round++);
      return to_native(mh_sample(*model.energy, cfg, k).sample, model.transforms, survivors);
    };
  }

  return enforce_constraints(draw(n), survivors, draw).table;
}

EvaluationReport evaluate(const Table& real, const Table& synth, const EvaluateOptions& options) {
  if (real.n_cols() == 0 || real.n_rows() == 0)
    throw std::invalid_argument("real table is empty");

  // Column alignment is by name; order differences are fine, missing or
  // extra columns are not.
  std::vector<std::string> missing, extra;
  Table aligned;
  aligned.column_names = real.column_names;
  for (const std::string& name : real.column_names) {
    auto it = std::find(synth.column_names.begin(), synth.column_names.end(), name);
    if (it == synth.column_names.end())
      missing.push_back(name);
    else
      aligned.columns.push_back(
          synth.columns[static_cast<std::size_t>(it - synth.column_names.begin())]);
  }
  for (const std::string& name : synth.column_names)
    if (std::find(real.column_names.begin(), real.column_names.end(), name) ==
        real.column_names.end())
      extra.push_back(name);
  if (!missing.empty() || !extra.empty()) {
    std::ostringstream msg;
    msg << "column names do not match";
    if (!missing.empty()) {
      msg << "; missing from synthetic:";
      for (const auto& s : missing) msg << ' ' << s;
    }
    if (!extra.empty()) {
      msg << "; not in real:";
      for (const auto& s : extra) msg << ' ' << s;
    }
    throw std::invalid_argument(msg.str());
  }

  const std::vector<ColumnSchema> schemas = infer_schema(real);
  EvaluationReport report;
  report.quality = similarity_score(real, aligned, schemas, options.seed, options.row_cap);

  if (options.indistinguishability) {
    const std::size_t expected = (real.n_rows() + 1) / 2;
    Table half = aligned;
    if (aligned.n_rows() > expected) {
      std::vector<std::size_t> all(aligned.n_rows());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      std::vector<std::size_t> keep;
      keep.reserve(expected);
      auto rng = make_rng(options.seed, Stream::indistinguishability, 1);
      std::sample(all.begin(), all.end(), std::back_inserter(keep), expected, rng);
      half = select_rows(aligned, keep);
    }
    report.indist =
        indistinguishability_test(real, half, schemas, options.n_splits, options.seed);
    report.indist_synth_rows = half.n_rows();
  }

  if (options.dcr) report.dcr = dcr_score(real, aligned, schemas, options.seed);
  return report;
}

}  // namespace maxtab
