#include <map>
#include <mutex>

#include "mlkit/error.hpp"
#include "mlkit/featsel.hpp"
#include "mlkit/resample.hpp"
#include "mlkit/wrappers.hpp"

namespace mlkit {

namespace {

std::map<std::string, std::function<json(const ModelPtr&)>>& registry() {
  static std::map<std::string, std::function<json(const ModelPtr&)>> reg;
  return reg;
}

std::mutex reg_mutex;

json extract_feat_importance(const ModelPtr& model) {
  json out = json::object();
  for (const auto& [name, value] : get_feature_importance(model))
    out[name] = value;
  return out;
}

}  // namespace

void register_extractor(const std::string& name,
                        std::function<json(const ModelPtr&)> fn) {
  std::lock_guard<std::mutex> lock(reg_mutex);
  registry()[name] = std::move(fn);
}

std::function<json(const ModelPtr&)> named_extractor(const std::string& name) {
  if (name == "feat_importance") return extract_feat_importance;
  if (name == "tune_result")
    return [](const ModelPtr& m) { return get_tune_result(m).to_json(); };
  if (name == "featsel_result")
    return [](const ModelPtr& m) { return get_featsel_result(m).to_json(); };
  std::lock_guard<std::mutex> lock(reg_mutex);
  auto it = registry().find(name);
  if (it == registry().end())
    throw ValueError("unknown extractor: " + name);
  return it->second;
}

}  // namespace mlkit
