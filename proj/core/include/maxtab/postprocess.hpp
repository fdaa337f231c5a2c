#pragma once

#include "maxtab/table.hpp"
#include "maxtab/transform.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace maxtab {

// Rounding and clamping rules driven by the column role.
struct CoercionPolicy {
  bool round_to_integer = false;
  bool clamp_to_codebook = false;
  int n_codes = 0;
  SignConstraint sign = SignConstraint::none;
};

CoercionPolicy coercion_policy(const ColumnSchema& schema);

// Inverse-transforms each column and applies its coercion policy (integer and
// categorical columns round; categorical codes clamp to the codebook). The
// schemas must be the surviving ones, aligned with the transform states.
Table to_native(const Eigen::MatrixXd& sampled, const std::vector<ColumnTransform>& transforms,
                const std::vector<ColumnSchema>& schemas);

// Supplies replacement native-space rows for discarded ones.
using Resampler = std::function<Table(std::size_t n)>;

struct CoercionOutcome {
  Table table;
  bool complete = true;       // false when the round cap left the table short
  int rounds = 0;             // resampling rounds used
  std::size_t replaced = 0;   // rows that violated a sign constraint
};

// Drops rows breaking a column sign constraint and refills them from the
// resampler, up to 20 rounds; a persistent shortfall yields a shorter table
// with complete = false.
CoercionOutcome enforce_constraints(const Table& native, const std::vector<ColumnSchema>& schemas,
                                    const Resampler& resampler);

}  // namespace maxtab
