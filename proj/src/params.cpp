#include "mlkit/params.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mlkit/error.hpp"

namespace mlkit {

Param make_numeric_param(std::string id, double lower, double upper,
                         std::optional<double> def) {
  Param p;
  p.id = std::move(id);
  p.kind = ParamKind::Numeric;
  p.lower = lower;
  p.upper = upper;
  if (lower > upper) throw ValueError("param '" + p.id + "': lower > upper");
  if (def) p.default_value = *def;
  return p;
}

Param make_integer_param(std::string id, long long lower, long long upper,
                         std::optional<long long> def) {
  Param p;
  p.id = std::move(id);
  p.kind = ParamKind::Integer;
  p.lower = static_cast<double>(lower);
  p.upper = static_cast<double>(upper);
  if (lower > upper) throw ValueError("param '" + p.id + "': lower > upper");
  if (def) p.default_value = *def;
  return p;
}

Param make_numeric_vector_param(std::string id, int len, double lower,
                                double upper) {
  Param p;
  p.id = std::move(id);
  p.kind = ParamKind::NumericVector;
  p.len = len;
  p.lower = lower;
  p.upper = upper;
  if (len < 1) throw ValueError("param '" + p.id + "': len must be >= 1");
  if (lower > upper) throw ValueError("param '" + p.id + "': lower > upper");
  return p;
}

Param make_discrete_param(std::string id, std::vector<json> values,
                          std::optional<json> def) {
  Param p;
  p.id = std::move(id);
  p.kind = ParamKind::Discrete;
  p.values = std::move(values);
  if (p.values.empty())
    throw ValueError("param '" + p.id + "': discrete values must be nonempty");
  if (def) p.default_value = *def;
  return p;
}

Param make_logical_param(std::string id, std::optional<bool> def) {
  Param p;
  p.id = std::move(id);
  p.kind = ParamKind::Logical;
  if (def) p.default_value = *def;
  return p;
}

bool param_values_equal(const json& a, const json& b) {
  if (a.is_number() && b.is_number())
    return a.get<double>() == b.get<double>();
  return a == b;
}

const Param* ParamSet::find(const std::string& id) const {
  for (const auto& p : params)
    if (p.id == id) return &p;
  return nullptr;
}

void ParamSet::add(Param p) {
  if (has(p.id)) throw ValueError("duplicate param id: " + p.id);
  params.push_back(std::move(p));
}

ParamSet ParamSet::merged_with(const ParamSet& other) const {
  ParamSet out = *this;
  for (const auto& p : other.params) out.add(p);
  return out;
}

void ParamSet::check_value(const std::string& id, const json& value) const {
  const Param* p = find(id);
  if (!p)
    throw ValueError("setting parameter without available description: " + id);
  switch (p->kind) {
    case ParamKind::Numeric: {
      if (!value.is_number())
        throw ValueError("param '" + id + "' expects a number");
      const double v = value.get<double>();
      if (v < p->lower || v > p->upper)
        throw ValueError("param '" + id + "' value " + format_number(v) +
                         " violates bounds [" + format_number(p->lower) + ", " +
                         format_number(p->upper) + "]");
      break;
    }
    case ParamKind::Integer: {
      if (!value.is_number_integer() && !value.is_number_unsigned()) {
        if (!(value.is_number() &&
              value.get<double>() == std::floor(value.get<double>())))
          throw ValueError("param '" + id + "' expects an integer");
      }
      const double v = value.get<double>();
      if (v < p->lower || v > p->upper)
        throw ValueError("param '" + id + "' value " + format_number(v) +
                         " violates bounds [" + format_number(p->lower) + ", " +
                         format_number(p->upper) + "]");
      break;
    }
    case ParamKind::NumericVector: {
      if (!value.is_array() || static_cast<int>(value.size()) != p->len)
        throw ValueError("param '" + id + "' expects a numeric vector of length " +
                         std::to_string(p->len));
      for (const auto& el : value) {
        if (!el.is_number())
          throw ValueError("param '" + id + "' expects numeric entries");
        const double v = el.get<double>();
        if (v < p->lower || v > p->upper)
          throw ValueError("param '" + id + "' entry violates bounds");
      }
      break;
    }
    case ParamKind::Discrete: {
      for (const auto& allowed : p->values)
        if (param_values_equal(allowed, value)) return;
      throw ValueError("param '" + id + "' value " + value.dump() +
                       " is not among the allowed values");
    }
    case ParamKind::Logical: {
      if (!value.is_boolean())
        throw ValueError("param '" + id + "' expects a logical");
      break;
    }
  }
}

bool ParamSet::is_active(const std::string& id, const ParamMap& values) const {
  const Param* p = find(id);
  if (!p) return false;
  if (!p->requires_fn) return true;
  return p->requires_fn(values);
}

void ParamSet::check_map(const ParamMap& values) const {
  for (const auto& [id, v] : values) check_value(id, v);
  for (const auto& [id, v] : values) {
    (void)v;
    const Param* p = find(id);
    if (p->requires_fn && !p->requires_fn(values))
      throw ValueError("param '" + id + "' set but its dependency (" +
                       p->requires_desc + ") is not satisfied");
  }
}

ParamMap ParamSet::with_defaults(const ParamMap& values) const {
  ParamMap out = values;
  // Iterate until stable so defaults can enable dependent defaults.
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& p : params) {
      if (out.count(p.id) || !p.default_value) continue;
      if (p.requires_fn && !p.requires_fn(out)) continue;
      out[p.id] = *p.default_value;
      changed = true;
    }
  }
  return out;
}

ParamMap ParamSet::apply_trafos(const ParamMap& values) const {
  ParamMap out;
  for (const auto& [id, v] : values) {
    const Param* p = find(id);
    out[id] = (p && p->trafo) ? p->trafo(v) : v;
  }
  return out;
}

namespace {

// Equally spaced points, lower..upper inclusive.
std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  out.reserve(n);
  if (n == 1) {
    out.push_back(lo);
    return out;
  }
  for (int i = 0; i < n; ++i)
    out.push_back(lo + (hi - lo) * static_cast<double>(i) / (n - 1));
  return out;
}

struct GridDim {
  std::string param_id;   // owning param
  int vector_index = -1;  // >=0 when this dim is one slot of a vector param
  std::vector<json> points;
};

// Removes values of inactive params, iterating because dependencies chain.
ParamMap clean_inactive(const ParamSet& ps, ParamMap cfg) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = cfg.begin(); it != cfg.end();) {
      const Param* p = ps.find(it->first);
      if (p && p->requires_fn && !p->requires_fn(cfg)) {
        it = cfg.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
  }
  return cfg;
}

bool map_equal(const ParamMap& a, const ParamMap& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    if (it == b.end() || !param_values_equal(v, it->second)) return false;
  }
  return true;
}

}  // namespace

std::vector<ParamMap> grid_design(const ParamSet& ps, int resolution) {
  if (resolution < 1) throw ValueError("grid resolution must be >= 1");
  std::vector<GridDim> dims;
  for (const auto& p : ps.params) {
    switch (p.kind) {
      case ParamKind::Numeric: {
        if (!p.has_bounds())
          throw ValueError("grid over unbounded numeric param: " + p.id);
        GridDim d{p.id, -1, {}};
        for (double v : linspace(p.lower, p.upper, resolution))
          d.points.push_back(v);
        dims.push_back(std::move(d));
        break;
      }
      case ParamKind::Integer: {
        if (!p.has_bounds())
          throw ValueError("grid over unbounded integer param: " + p.id);
        GridDim d{p.id, -1, {}};
        std::vector<long long> vals;
        for (double v : linspace(p.lower, p.upper, resolution)) {
          const long long r = std::llround(v);
          if (std::find(vals.begin(), vals.end(), r) == vals.end())
            vals.push_back(r);
        }
        for (long long v : vals) d.points.push_back(v);
        dims.push_back(std::move(d));
        break;
      }
      case ParamKind::NumericVector: {
        if (!p.has_bounds())
          throw ValueError("grid over unbounded vector param: " + p.id);
        for (int k = 0; k < p.len; ++k) {
          GridDim d{p.id, k, {}};
          for (double v : linspace(p.lower, p.upper, resolution))
            d.points.push_back(v);
          dims.push_back(std::move(d));
        }
        break;
      }
      case ParamKind::Discrete: {
        GridDim d{p.id, -1, {}};
        d.points = p.values;
        dims.push_back(std::move(d));
        break;
      }
      case ParamKind::Logical: {
        GridDim d{p.id, -1, {true, false}};
        dims.push_back(std::move(d));
        break;
      }
    }
  }
  if (dims.empty()) return {ParamMap{}};

  // Cross product, first dimension varying fastest.
  std::size_t total = 1;
  for (const auto& d : dims) {
    total *= d.points.size();
    if (total > 5'000'000)
      throw ValueError("grid design too large (> 5e6 points)");
  }
  std::vector<ParamMap> raw;
  raw.reserve(total);
  std::vector<std::size_t> idx(dims.size(), 0);
  for (std::size_t t = 0; t < total; ++t) {
    ParamMap cfg;
    for (std::size_t d = 0; d < dims.size(); ++d) {
      const auto& dim = dims[d];
      const json& v = dim.points[idx[d]];
      if (dim.vector_index < 0) {
        cfg[dim.param_id] = v;
      } else {
        auto& arr = cfg[dim.param_id];
        if (!arr.is_array()) arr = json::array();
        while (static_cast<int>(arr.size()) <= dim.vector_index)
          arr.push_back(nullptr);
        arr[dim.vector_index] = v;
      }
    }
    raw.push_back(std::move(cfg));
    for (std::size_t d = 0; d < dims.size(); ++d) {
      if (++idx[d] < dims[d].points.size()) break;
      idx[d] = 0;
    }
  }

  // Drop inactive params, then deduplicate.
  std::vector<ParamMap> out;
  for (auto& cfg : raw) {
    ParamMap cleaned = clean_inactive(ps, std::move(cfg));
    bool dup = false;
    for (const auto& prev : out)
      if (map_equal(prev, cleaned)) {
        dup = true;
        break;
      }
    if (!dup) out.push_back(std::move(cleaned));
  }
  return out;
}

std::vector<ParamMap> random_design(const ParamSet& ps, int n, Rng& rng) {
  if (n < 0) throw ValueError("random design size must be >= 0");
  std::vector<ParamMap> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    ParamMap cfg;
    // Params are sampled in declaration order so `requires` can reference
    // earlier params; inactive params are skipped (no value drawn).
    for (const auto& p : ps.params) {
      if (p.requires_fn && !p.requires_fn(cfg)) continue;
      switch (p.kind) {
        case ParamKind::Numeric:
          if (!p.has_bounds())
            throw ValueError("random design over unbounded param: " + p.id);
          cfg[p.id] = rng.unif(p.lower, p.upper);
          break;
        case ParamKind::Integer:
          if (!p.has_bounds())
            throw ValueError("random design over unbounded param: " + p.id);
          cfg[p.id] = rng.unif_int(static_cast<long long>(p.lower),
                                   static_cast<long long>(p.upper));
          break;
        case ParamKind::NumericVector: {
          json arr = json::array();
          for (int k = 0; k < p.len; ++k)
            arr.push_back(rng.unif(p.lower, p.upper));
          cfg[p.id] = std::move(arr);
          break;
        }
        case ParamKind::Discrete:
          cfg[p.id] = p.values[rng.unif_int(0, static_cast<long long>(p.values.size()) - 1)];
          break;
        case ParamKind::Logical:
          cfg[p.id] = rng.unif_int(0, 1) == 1;
          break;
      }
    }
    out.push_back(clean_inactive(ps, std::move(cfg)));
  }
  return out;
}

std::function<json(const json&)> named_trafo(const std::string& name) {
  if (name.empty() || name == "none") return nullptr;
  if (name == "pow10")
    return [](const json& v) { return std::pow(10.0, v.get<double>()); };
  if (name == "pow2")
    return [](const json& v) { return std::pow(2.0, v.get<double>()); };
  if (name == "exp")
    return [](const json& v) { return std::exp(v.get<double>()); };
  if (name == "log")
    return [](const json& v) { return std::log(v.get<double>()); };
  if (name == "sqrt")
    return [](const json& v) { return std::sqrt(v.get<double>()); };
  if (name == "square") return [](const json& v) {
    const double x = v.get<double>();
    return x * x;
  };
  throw ValueError("unknown trafo: " + name);
}

}  // namespace mlkit
