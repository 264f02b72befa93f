#include "hcbr/case.hpp"

#include <algorithm>

#include "hcbr/error.hpp"

namespace hcbr {

Case::Case(const Hierarchy& h, std::vector<NodeIndex> factors, std::optional<Side> outcome)
    : factors_(std::move(factors)), outcome_(outcome) {
  for (NodeIndex f : factors_) {
    if (!h.is_factor(f)) {
      throw Error(Errc::ForeignFactor,
                  "node index " + std::to_string(f.value) + " is not a factor of the hierarchy");
    }
  }
  std::sort(factors_.begin(), factors_.end());
  factors_.erase(std::unique(factors_.begin(), factors_.end()), factors_.end());
}

bool Case::contains(NodeIndex f) const {
  return std::binary_search(factors_.begin(), factors_.end(), f);
}

Case make_case(const Hierarchy& h, std::span<const std::string> labels,
               std::optional<Side> outcome) {
  std::vector<NodeIndex> factors;
  factors.reserve(labels.size());
  for (const std::string& label : labels) {
    auto idx = h.find(label);
    if (!idx || !h.is_factor(*idx)) {
      throw Error(Errc::ForeignFactor, "'" + label + "' is not a factor of the hierarchy", 0,
                  {label});
    }
    factors.push_back(*idx);
  }
  return Case(h, std::move(factors), outcome);
}

nlohmann::json case_to_json(const Hierarchy& h, const Case& c) {
  nlohmann::json factors = nlohmann::json::array();
  for (NodeIndex f : c.factors()) factors.push_back(h.node(f).canonical());
  nlohmann::json j{{"factors", std::move(factors)}};
  if (c.outcome()) j["outcome"] = std::string(side_code(*c.outcome()));
  return j;
}

Case case_from_json(const Hierarchy& h, const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("factors") || !j["factors"].is_array()) {
    throw Error(Errc::SchemaMismatch, "case document needs a 'factors' array");
  }
  std::vector<std::string> labels;
  for (const auto& f : j["factors"]) {
    if (!f.is_string()) throw Error(Errc::SchemaMismatch, "factor labels must be strings");
    labels.push_back(f.get<std::string>());
  }
  std::optional<Side> outcome;
  if (auto it = j.find("outcome"); it != j.end() && !it->is_null()) {
    if (!it->is_string() || !(outcome = parse_side(it->get<std::string>()))) {
      throw Error(Errc::SchemaMismatch, "outcome must be \"p\" or \"d\"");
    }
  }
  return make_case(h, labels, outcome);
}

std::string describe_case(const Hierarchy& h, const Case& c) {
  std::string out;
  for (NodeIndex f : c.factors()) {
    if (!out.empty()) out += ", ";
    out += h.node(f).canonical();
  }
  return out;
}

}  // namespace hcbr
