#include "opfrelax/cases.hpp"

#include <filesystem>

// Keep in sync with data/cases/*.json; tests compare the two.

namespace opfrelax {

namespace {

constexpr std::string_view kTwoBus = R"json({
  "name": "two-bus",
  "buses": [
    {"id": 1, "load_p": 0.0, "load_q": 0.0, "v_min": 1.0, "v_max": 1.0, "reference": true},
    {"id": 2, "load_p": 0.0, "load_q": 0.0, "v_min": 1.3, "v_max": 1.3}
  ],
  "generators": [
    {"bus": 1, "cost": [0.0, 1.0, 0.0]},
    {"bus": 2, "p_min": 0.0, "p_max": 0.0, "cost": [0.0, 0.0, 0.0]}
  ],
  "branches": [
    {"from": 1, "to": 2, "r": 0.06129, "x": 0.05117}
  ]
})json";

constexpr std::string_view kThreeBus = R"json({
  "name": "three-bus",
  "buses": [
    {"id": 1, "load_p": 0.0, "load_q": 0.0, "v_min": 1.0, "v_max": 1.0, "reference": true},
    {"id": 2, "load_p": 0.0, "load_q": 0.0, "v_min": 1.3, "v_max": 1.3},
    {"id": 3, "load_p": 0.0, "load_q": 0.0}
  ],
  "generators": [
    {"bus": 1, "cost": [0.0, 1.0, 0.0]},
    {"bus": 2, "p_min": 0.0, "p_max": 0.0, "cost": [0.0, 0.0, 0.0]},
    {"bus": 3, "p_min": 0.0, "p_max": 0.0, "q_min": 0.0, "q_max": 0.0, "cost": [0.0, 0.0, 0.0]}
  ],
  "branches": [
    {"from": 1, "to": 2, "r": 0.15, "x": 0.1},
    {"from": 1, "to": 3, "r": 0.1, "x": 0.05},
    {"from": 2, "to": 3, "r": 0.001, "x": 0.05}
  ]
})json";

struct Entry {
  std::string_view name;
  std::string_view document;
};

constexpr Entry kCases[] = {{"two-bus", kTwoBus}, {"three-bus", kThreeBus}};

}  // namespace

std::vector<std::string> builtin_case_names() {
  std::vector<std::string> names;
  for (const auto& e : kCases) names.emplace_back(e.name);
  return names;
}

std::string_view builtin_case_document(std::string_view name) {
  for (const auto& e : kCases) {
    if (e.name == name) return e.document;
  }
  std::string available;
  for (const auto& e : kCases) {
    if (!available.empty()) available += ", ";
    available += e.name;
  }
  throw std::out_of_range("unknown case '" + std::string(name) + "' (available: " + available + ")");
}

NetworkCase builtin_case(std::string_view name) { return load_case(builtin_case_document(name)); }

NetworkCase resolve_case(const std::string& name_or_path) {
  for (const auto& e : kCases) {
    if (e.name == name_or_path) return load_case(e.document);
  }
  if (std::filesystem::exists(name_or_path)) return load_case_file(name_or_path);
  // Neither a bundled name nor an existing file: report the bundled names.
  return builtin_case(name_or_path);
}

}  // namespace opfrelax
