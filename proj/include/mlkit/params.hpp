#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlkit/rng.hpp"
#include "mlkit/table.hpp"

namespace mlkit {

enum class ParamKind { Numeric, Integer, NumericVector, Discrete, Logical };

// A named hyperparameter configuration. Values are json scalars/arrays.
using ParamMap = std::map<std::string, json>;

struct Param {
  std::string id;
  ParamKind kind = ParamKind::Numeric;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  int len = 1;                     // NumericVector only
  std::vector<json> values;        // Discrete only
  std::optional<json> default_value;
  // Monotone transformation applied before the learner sees the value.
  std::function<json(const json&)> trafo;
  // Dependency on other params in the same set; param is active iff the
  // predicate holds (absent predicate = always active).
  std::function<bool(const ParamMap&)> requires_fn;
  std::string requires_desc;  // printable form, e.g. "kernel == rbf"

  bool has_bounds() const {
    return std::isfinite(lower) && std::isfinite(upper);
  }
};

Param make_numeric_param(std::string id, double lower, double upper,
                         std::optional<double> def = std::nullopt);
Param make_integer_param(std::string id, long long lower, long long upper,
                         std::optional<long long> def = std::nullopt);
Param make_numeric_vector_param(std::string id, int len, double lower,
                                double upper);
Param make_discrete_param(std::string id, std::vector<json> values,
                          std::optional<json> def = std::nullopt);
Param make_logical_param(std::string id, std::optional<bool> def = std::nullopt);

struct ParamSet {
  std::vector<Param> params;

  bool empty() const { return params.empty(); }
  int size() const { return static_cast<int>(params.size()); }
  const Param* find(const std::string& id) const;
  bool has(const std::string& id) const { return find(id) != nullptr; }
  void add(Param p);
  ParamSet merged_with(const ParamSet& other) const;  // ids must be disjoint

  // Validates one value against its param (kind, bounds, membership).
  void check_value(const std::string& id, const json& value) const;
  // Validates a full assignment including dependency satisfaction.
  void check_map(const ParamMap& values) const;

  // Fills defaults for absent params whose dependencies are satisfied.
  ParamMap with_defaults(const ParamMap& values) const;

  // Applies each param's trafo to the mapped values.
  ParamMap apply_trafos(const ParamMap& values) const;

  // True iff param `id` is active under the partial assignment.
  bool is_active(const std::string& id, const ParamMap& values) const;
};

// Full factorial design: `resolution` equally spaced points per bounded
// numeric/integer param (pre-trafo), all values for discrete/logical.
// Dependency-invalid combinations are cleaned and deduplicated.
std::vector<ParamMap> grid_design(const ParamSet& ps, int resolution = 10);

// n independent uniform draws; dependent params sampled only when active.
std::vector<ParamMap> random_design(const ParamSet& ps, int n, Rng& rng);

// Named trafos available from configs: "none", "pow10" (10^x), "pow2",
// "exp", "log", "sqrt", "square".
std::function<json(const json&)> named_trafo(const std::string& name);

bool param_values_equal(const json& a, const json& b);

}  // namespace mlkit
