#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "opfrelax/network.hpp"

namespace opfrelax {

namespace {

using nlohmann::json;

class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail("", "expected an object");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const std::string where = key.empty() ? path_ : path_ + "." + key;
    throw ParseError("case document: field '" + where + "': " + what);
  }

  double number(const std::string& key) const {
    if (!node_.contains(key)) fail(key, "missing required number");
    return as_number(key);
  }

  double number_or(const std::string& key, double fallback) const {
    return node_.contains(key) ? as_number(key) : fallback;
  }

  std::optional<double> optional_number(const std::string& key) const {
    if (!node_.contains(key) || node_.at(key).is_null()) return std::nullopt;
    return as_number(key);
  }

  int integer(const std::string& key) const {
    if (!node_.contains(key)) fail(key, "missing required integer");
    const json& v = node_.at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<int>();
  }

  bool boolean_or(const std::string& key, bool fallback) const {
    if (!node_.contains(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  const json& array(const std::string& key) const {
    if (!node_.contains(key)) fail(key, "missing required array");
    const json& v = node_.at(key);
    if (!v.is_array()) fail(key, "expected an array");
    return v;
  }

  const std::string& path() const { return path_; }

 private:
  double as_number(const std::string& key) const {
    const json& v = node_.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }

  const json& node_;
  std::string path_;
};

std::string indexed(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

void put_optional(json& j, const char* key, const std::optional<double>& v) {
  if (v) j[key] = *v;
}

}  // namespace

NetworkCase load_case(std::string_view document) {
  json root;
  try {
    root = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("case document: syntax error: ") + e.what());
  }
  const Reader top(root, "$");

  NetworkCase out;
  if (root.contains("name")) {
    if (!root.at("name").is_string()) top.fail("name", "expected a string");
    out.name = root.at("name").get<std::string>();
  }

  const json& buses = top.array("buses");
  for (std::size_t i = 0; i < buses.size(); ++i) {
    const Reader r(buses[i], indexed("buses", i));
    Bus b;
    b.id = r.integer("id");
    b.load_p = r.number_or("load_p", 0.0);
    b.load_q = r.number_or("load_q", 0.0);
    b.v_min = r.optional_number("v_min");
    b.v_max = r.optional_number("v_max");
    b.is_reference = r.boolean_or("reference", false);
    out.buses.push_back(b);
  }
  std::sort(out.buses.begin(), out.buses.end(),
            [](const Bus& a, const Bus& b) { return a.id < b.id; });

  if (root.contains("generators")) {
    const json& gens = top.array("generators");
    for (std::size_t i = 0; i < gens.size(); ++i) {
      const Reader r(gens[i], indexed("generators", i));
      Generator g;
      g.bus = r.integer("bus");
      g.p_min = r.optional_number("p_min");
      g.p_max = r.optional_number("p_max");
      g.q_min = r.optional_number("q_min");
      g.q_max = r.optional_number("q_max");
      if (gens[i].contains("cost")) {
        const json& cost = r.array("cost");
        if (cost.size() != 3 || !std::all_of(cost.begin(), cost.end(),
                                             [](const json& c) { return c.is_number(); })) {
          r.fail("cost", "expected [c2, c1, c0]");
        }
        g.cost_c2 = cost[0].get<double>();
        g.cost_c1 = cost[1].get<double>();
        g.cost_c0 = cost[2].get<double>();
      }
      out.generators.push_back(g);
    }
  }

  const json& branches = top.array("branches");
  for (std::size_t i = 0; i < branches.size(); ++i) {
    const Reader r(branches[i], indexed("branches", i));
    Branch br;
    br.from = r.integer("from");
    br.to = r.integer("to");
    br.r = r.number("r");
    br.x = r.number("x");
    br.b_sh = r.number_or("b_sh", 0.0);
    br.tau = r.number_or("tau", 1.0);
    br.shift = r.number_or("shift", 0.0);
    br.s_max = r.optional_number("s_max");
    out.branches.push_back(br);
  }

  validate(out);
  return out;
}

NetworkCase load_case_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open case file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_case(buffer.str());
}

std::string dump_case(const NetworkCase& network) {
  json root;
  root["name"] = network.name;
  root["buses"] = json::array();
  for (const Bus& b : network.buses) {
    json jb = {{"id", b.id}, {"load_p", b.load_p}, {"load_q", b.load_q}};
    put_optional(jb, "v_min", b.v_min);
    put_optional(jb, "v_max", b.v_max);
    if (b.is_reference) jb["reference"] = true;
    root["buses"].push_back(jb);
  }
  root["generators"] = json::array();
  for (const Generator& g : network.generators) {
    json jg = {{"bus", g.bus}, {"cost", {g.cost_c2, g.cost_c1, g.cost_c0}}};
    put_optional(jg, "p_min", g.p_min);
    put_optional(jg, "p_max", g.p_max);
    put_optional(jg, "q_min", g.q_min);
    put_optional(jg, "q_max", g.q_max);
    root["generators"].push_back(jg);
  }
  root["branches"] = json::array();
  for (const Branch& br : network.branches) {
    json jb = {{"from", br.from}, {"to", br.to}, {"r", br.r}, {"x", br.x}};
    if (br.b_sh != 0.0) jb["b_sh"] = br.b_sh;
    if (br.tau != 1.0) jb["tau"] = br.tau;
    if (br.shift != 0.0) jb["shift"] = br.shift;
    put_optional(jb, "s_max", br.s_max);
    root["branches"].push_back(jb);
  }
  return root.dump(2);
}

}  // namespace opfrelax
