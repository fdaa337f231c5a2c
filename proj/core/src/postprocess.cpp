#include "maxtab/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace maxtab {

CoercionPolicy coercion_policy(const ColumnSchema& schema) {
  CoercionPolicy p;
  p.round_to_integer = schema.role != ColumnRole::continuous;
  p.clamp_to_codebook = schema.role == ColumnRole::categorical;
  p.n_codes = static_cast<int>(schema.codebook.size());
  p.sign = schema.sign_constraint;
  return p;
}

Table to_native(const Eigen::MatrixXd& sampled, const std::vector<ColumnTransform>& transforms,
                const std::vector<ColumnSchema>& schemas) {
  const auto d = static_cast<std::size_t>(sampled.cols());
  if (transforms.size() != d || schemas.size() != d)
    throw std::invalid_argument("to_native: transforms and schemas must match the sample width");

  Table out;
  out.columns.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    const CoercionPolicy policy = coercion_policy(schemas[j]);
    out.column_names.push_back(schemas[j].name);
    auto& col = out.columns[j];
    col.resize(static_cast<std::size_t>(sampled.rows()));
    for (Eigen::Index r = 0; r < sampled.rows(); ++r) {
      double v = inverse_value(sampled(r, static_cast<Eigen::Index>(j)), transforms[j]);
      if (std::isnan(v)) {
        col[static_cast<std::size_t>(r)] = Cell{};
        continue;
      }
      if (policy.round_to_integer) v = std::round(v);
      if (policy.clamp_to_codebook && policy.n_codes > 0)
        v = std::clamp(v, 0.0, static_cast<double>(policy.n_codes - 1));
      col[static_cast<std::size_t>(r)] = Cell{v};
    }
  }
  return out;
}

namespace {

bool violates(const Cell& cell, SignConstraint sign) {
  if (sign == SignConstraint::none || !is_number(cell)) return false;
  double v = number_of(cell);
  return sign == SignConstraint::non_negative ? v < 0.0 : v > 0.0;
}

bool row_ok(const Table& t, std::size_t r, const std::vector<ColumnSchema>& schemas) {
  for (std::size_t j = 0; j < t.n_cols(); ++j)
    if (violates(t.columns[j][r], schemas[j].sign_constraint)) return false;
  return true;
}

}  // namespace

CoercionOutcome enforce_constraints(const Table& native, const std::vector<ColumnSchema>& schemas,
                                    const Resampler& resampler) {
  if (schemas.size() != native.n_cols())
    throw std::invalid_argument("enforce_constraints: schema count does not match the table");

  const std::size_t target = native.n_rows();

  CoercionOutcome out;
  out.table.column_names = native.column_names;
  out.table.columns.resize(native.n_cols());

  auto append_valid = [&](const Table& src) {
    std::size_t kept = 0;
    for (std::size_t r = 0; r < src.n_rows() && out.table.n_rows() < target; ++r) {
      if (!row_ok(src, r, schemas)) {
        ++out.replaced;
        continue;
      }
      for (std::size_t j = 0; j < src.n_cols(); ++j)
        out.table.columns[j].push_back(src.columns[j][r]);
      ++kept;
    }
    return kept;
  };

  append_valid(native);
  constexpr int kMaxRounds = 20;
  while (out.table.n_rows() < target && out.rounds < kMaxRounds) {
    ++out.rounds;
    std::size_t need = target - out.table.n_rows();
    Table extra = resampler(need);
    if (extra.n_cols() != native.n_cols())
      throw std::runtime_error("resampler returned a table with the wrong column count");
    append_valid(extra);
  }
  out.complete = out.table.n_rows() == target;
  return out;
}

}  // namespace maxtab
