#include "maxtab/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

// Serialization lives apart from the pipeline so the json dependency stays
// out of the public headers. nlohmann orders object keys and emits shortest
// round-trip doubles, which makes the files byte-stable for a given model.

namespace maxtab {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from_json(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = a.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  const auto nr = static_cast<Eigen::Index>(rows.size());
  const auto nc = nr ? static_cast<Eigen::Index>(rows.at(0).size()) : 0;
  Eigen::MatrixXd m(nr, nc);
  for (Eigen::Index r = 0; r < nr; ++r) {
    const json& row = rows.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != nc)
      throw std::runtime_error("ragged matrix in model file");
    for (Eigen::Index c = 0; c < nc; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

std::string role_name(ColumnRole role) {
  switch (role) {
    case ColumnRole::continuous: return "continuous";
    case ColumnRole::integer_valued: return "integer";
    case ColumnRole::categorical: return "categorical";
  }
  throw std::logic_error("unknown column role");
}

ColumnRole role_from_name(const std::string& s) {
  if (s == "continuous") return ColumnRole::continuous;
  if (s == "integer") return ColumnRole::integer_valued;
  if (s == "categorical") return ColumnRole::categorical;
  throw std::runtime_error("unknown column role '" + s + "' in model file");
}

std::string sign_name(SignConstraint sign) {
  switch (sign) {
    case SignConstraint::none: return "none";
    case SignConstraint::non_negative: return "non-negative";
    case SignConstraint::non_positive: return "non-positive";
  }
  throw std::logic_error("unknown sign constraint");
}

SignConstraint sign_from_name(const std::string& s) {
  if (s == "none") return SignConstraint::none;
  if (s == "non-negative") return SignConstraint::non_negative;
  if (s == "non-positive") return SignConstraint::non_positive;
  throw std::runtime_error("unknown sign constraint '" + s + "' in model file");
}

json schema_to_json(const ColumnSchema& s) {
  json j;
  j["name"] = s.name;
  j["role"] = role_name(s.role);
  j["codebook"] = s.codebook;
  j["rare_label_present"] = s.rare_label_present;
  j["sign"] = sign_name(s.sign_constraint);
  j["dropped"] = s.dropped;
  j["drop_reason"] = s.drop_reason;
  return j;
}

ColumnSchema schema_from_json(const json& j) {
  ColumnSchema s;
  s.name = j.at("name").get<std::string>();
  s.role = role_from_name(j.at("role").get<std::string>());
  s.codebook = j.at("codebook").get<std::vector<std::string>>();
  s.rare_label_present = j.at("rare_label_present").get<bool>();
  s.sign_constraint = sign_from_name(j.at("sign").get<std::string>());
  s.dropped = j.at("dropped").get<bool>();
  s.drop_reason = j.at("drop_reason").get<std::string>();
  return s;
}

json transform_to_json(const ColumnTransform& t) {
  json j;
  j["values"] = t.sorted_native_values;
  j["positions"] = t.plotting_positions;
  j["zmin"] = t.zmin;
  j["zmax"] = t.zmax;
  j["u_mean"] = t.u_mean;
  return j;
}

ColumnTransform transform_from_json(const json& j) {
  ColumnTransform t;
  t.sorted_native_values = j.at("values").get<std::vector<double>>();
  t.plotting_positions = j.at("positions").get<std::vector<double>>();
  t.zmin = j.at("zmin").get<double>();
  t.zmax = j.at("zmax").get<double>();
  t.u_mean = j.at("u_mean").get<double>();
  return t;
}

json quality_to_json(const QualityReport& q) {
  json j;
  j["overall"] = q.overall;
  j["mean_1d"] = q.mean_1d;
  j["mean_2d"] = q.has_pair_scores ? json(q.mean_2d) : json(nullptr);
  j["rows_scored"] = {{"real", q.rows_scored_real}, {"synthetic", q.rows_scored_synth}};
  json cols = json::array();
  for (const auto& c : q.per_column) cols.push_back({{"name", c.name}, {"score", c.score}});
  j["columns"] = std::move(cols);
  json pairs = json::array();
  for (const auto& p : q.per_pair)
    pairs.push_back(
        {{"a", p.col_a}, {"b", p.col_b}, {"kind", p.kind}, {"score", p.score}});
  j["pairs"] = std::move(pairs);
  json skipped = json::array();
  for (const auto& p : q.skipped_pairs)
    skipped.push_back({{"a", p.col_a}, {"b", p.col_b}, {"reason", p.reason}});
  j["skipped_pairs"] = std::move(skipped);
  return j;
}

}  // namespace

std::string model_to_json(const FittedModel& model) {
  json j;
  j["format_version"] = kFormatVersion;
  j["seed"] = model.seed;
  j["kind"] = model.kind == ModelKind::order4 ? "order4" : "order2";

  json schemas = json::array();
  for (const ColumnSchema& s : model.schemas) schemas.push_back(schema_to_json(s));
  j["schemas"] = std::move(schemas);

  json transforms = json::array();
  for (const ColumnTransform& t : model.transforms) transforms.push_back(transform_to_json(t));
  j["transforms"] = std::move(transforms);

  j["gaussian"] = {{"mean", vector_to_json(model.gaussian.mean)},
                   {"covariance", matrix_to_json(model.gaussian.covariance)}};

  if (model.energy) {
    const EnergyModel& e = *model.energy;
    j["energy"] = {{"order", e.feature_set.order},
                   {"features", e.feature_set.features},
                   {"weights", vector_to_json(e.weights)},
                   {"ellipsoid",
                    {{"center", vector_to_json(e.ellipsoid.center)},
                     {"covariance", matrix_to_json(e.ellipsoid.covariance)},
                     {"cutoff", e.ellipsoid.mahalanobis_sq_cutoff}}}};
  }

  json trace = json::array();
  for (const EpochRecord& r : model.trace)
    trace.push_back({{"epoch", r.epoch},
                     {"score", r.score},
                     {"gradient_norm", r.gradient_norm},
                     {"acceptance_rate", r.acceptance_rate}});
  j["trace"] = std::move(trace);

  if (model.order2_score) j["order2_score"] = *model.order2_score;
  if (model.order4_score) j["order4_score"] = *model.order4_score;
  j["warnings"] = model.warnings;

  return j.dump(2) + "\n";
}

FittedModel model_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("model file is not valid json: ") + e.what());
  }
  const int version = j.at("format_version").get<int>();
  if (version != kFormatVersion)
    throw std::runtime_error("unsupported model format version " + std::to_string(version));

  FittedModel model;
  model.format_version = version;
  model.seed = j.at("seed").get<std::uint64_t>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "order2")
    model.kind = ModelKind::order2;
  else if (kind == "order4")
    model.kind = ModelKind::order4;
  else
    throw std::runtime_error("unknown model kind '" + kind + "'");

  for (const json& s : j.at("schemas")) model.schemas.push_back(schema_from_json(s));
  for (const json& t : j.at("transforms")) model.transforms.push_back(transform_from_json(t));

  const json& g = j.at("gaussian");
  model.gaussian.mean = vector_from_json(g.at("mean"));
  model.gaussian.covariance = matrix_from_json(g.at("covariance"));
  // The factor is not stored; the loader and the fitter share one code path,
  // so recomputing it reproduces the fitted factor exactly.
  model.gaussian.cholesky_factor = cholesky_with_jitter(model.gaussian.covariance);

  if (j.contains("energy")) {
    const json& e = j.at("energy");
    EnergyModel energy;
    const int n_cols = static_cast<int>(model.transforms.size());
    energy.feature_set.n_cols = n_cols;
    energy.feature_set.order = e.at("order").get<int>();
    energy.feature_set.features = e.at("features").get<std::vector<std::vector<int>>>();
    for (const auto& f : energy.feature_set.features) {
      if (f.empty() || static_cast<int>(f.size()) > energy.feature_set.order ||
          !std::is_sorted(f.begin(), f.end()) || f.front() < 0 || f.back() >= n_cols)
        throw std::runtime_error("malformed feature multiset in model file");
    }
    energy.weights = vector_from_json(e.at("weights"));
    if (energy.weights.size() != static_cast<Eigen::Index>(energy.feature_set.n_features()))
      throw std::runtime_error("model weight count does not match its feature set");
    const json& ell = e.at("ellipsoid");
    energy.ellipsoid.center = vector_from_json(ell.at("center"));
    energy.ellipsoid.covariance = matrix_from_json(ell.at("covariance"));
    energy.ellipsoid.mahalanobis_sq_cutoff = ell.at("cutoff").get<double>();
    energy.ellipsoid.finalize();
    model.energy = std::move(energy);
  } else if (model.kind == ModelKind::order4) {
    throw std::runtime_error("order4 model file carries no energy term");
  }

  for (const json& r : j.at("trace")) {
    EpochRecord rec;
    rec.epoch = r.at("epoch").get<long>();
    rec.score = r.at("score").get<double>();
    rec.gradient_norm = r.at("gradient_norm").get<double>();
    rec.acceptance_rate = r.at("acceptance_rate").get<double>();
    model.trace.push_back(rec);
  }

  if (j.contains("order2_score")) model.order2_score = j.at("order2_score").get<double>();
  if (j.contains("order4_score")) model.order4_score = j.at("order4_score").get<double>();
  model.warnings = j.at("warnings").get<std::vector<std::string>>();
  return model;
}

void save_model(const FittedModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << model_to_json(model);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

FittedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

std::string report_to_json(const EvaluationReport& report) {
  json j;
  j["quality"] = quality_to_json(report.quality);
  if (report.indist) {
    const IndistinguishabilityResult& r = *report.indist;
    j["indistinguishability"] = {{"synthetic_score", r.synthetic_score},
                                 {"p5", r.p5},
                                 {"p95", r.p95},
                                 {"verdict", r.verdict},
                                 {"p_value", r.p_value},
                                 {"split_scores", r.split_scores},
                                 {"synthetic_rows", report.indist_synth_rows}};
  }
  if (report.dcr) {
    const DcrResult& d = *report.dcr;
    j["dcr"] = {{"median_synthetic", d.median_dcr_synth},
                {"median_random_baseline", d.median_dcr_random},
                {"score", d.score}};
  }
  return j.dump(2) + "\n";
}

std::string report_to_markdown(const EvaluationReport& report) {
  std::ostringstream md;
  const QualityReport& q = report.quality;
  md << "# Synthetic data evaluation\n\n";
  md << "Overall similarity: **" << q.overall << "**\n\n";
  md << "- column-wise mean: " << q.mean_1d << "\n";
  if (q.has_pair_scores)
    md << "- pair-wise mean: " << q.mean_2d << "\n";
  else
    md << "- pair-wise mean: (no scorable pairs)\n";
  md << "- rows scored: " << q.rows_scored_real << " real, " << q.rows_scored_synth
     << " synthetic\n\n";

  md << "## Columns\n\n| column | score |\n|---|---|\n";
  for (const auto& c : q.per_column) md << "| " << c.name << " | " << c.score << " |\n";

  if (!q.per_pair.empty()) {
    md << "\n## Column pairs\n\n| pair | kind | score |\n|---|---|---|\n";
    for (const auto& p : q.per_pair)
      md << "| " << p.col_a << " / " << p.col_b << " | " << p.kind << " | " << p.score << " |\n";
  }
  if (!q.skipped_pairs.empty()) {
    md << "\n## Skipped pairs\n\n| pair | reason |\n|---|---|\n";
    for (const auto& p : q.skipped_pairs)
      md << "| " << p.col_a << " / " << p.col_b << " | " << p.reason << " |\n";
  }

  if (report.indist) {
    const IndistinguishabilityResult& r = *report.indist;
    md << "\n## Indistinguishability\n\n";
    md << "- synthetic score: " << r.synthetic_score << " (" << report.indist_synth_rows
       << " rows)\n";
    md << "- half-split reference band: [" << r.p5 << ", " << r.p95 << "]\n";
    md << "- verdict: **" << r.verdict << "**\n";
    md << "- p-value: " << r.p_value << "\n";
  }
  if (report.dcr) {
    const DcrResult& d = *report.dcr;
    md << "\n## Distance to closest record\n\n";
    md << "- median distance, synthetic rows: " << d.median_dcr_synth << "\n";
    md << "- median distance, random baseline: " << d.median_dcr_random << "\n";
    md << "- privacy score: **" << d.score << "**\n";
  }
  return md.str();
}

std::string trace_to_jsonl(const std::vector<EpochRecord>& trace) {
  std::ostringstream out;
  for (const EpochRecord& r : trace) {
    json j = {{"epoch", r.epoch},
              {"score", r.score},
              {"gradient_norm", r.gradient_norm},
              {"acceptance_rate", r.acceptance_rate}};
    out << j.dump() << "\n";
  }
  return out.str();
}

}  // namespace maxtab
