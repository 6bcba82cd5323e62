#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "opfrelax/network.hpp"

namespace opfrelax {

/// Names of the cases compiled into the library ("two-bus", "three-bus").
std::vector<std::string> builtin_case_names();

/// Raw JSON document of a bundled case; throws std::out_of_range listing the available names.
std::string_view builtin_case_document(std::string_view name);

NetworkCase builtin_case(std::string_view name);

/// Accepts either a bundled case name or a path to a case document.
NetworkCase resolve_case(const std::string& name_or_path);

}  // namespace opfrelax
