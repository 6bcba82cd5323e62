#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "opfrelax/sweep.hpp"

namespace opfrelax {

std::vector<double> SweepAxis::values() const {
  if (!(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
    throw PreconditionError("sweep axis on bus " + std::to_string(bus) + " needs finite lo <= hi and step > 0");
  }
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

namespace {

double parse_number(std::string_view s, std::string_view whole) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw PreconditionError("bad number '" + std::string(s) + "' in sweep '" + std::string(whole) + "'");
  }
  return v;
}

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::vector<SweepAxis> parse_sweep_axes(std::string_view text) {
  std::vector<SweepAxis> axes;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string_view item = text.substr(start, comma - start);
    const std::size_t eq = item.find('=');
    if (item.size() < 2 || (item[0] != 'p' && item[0] != 'P') || eq == std::string_view::npos) {
      throw PreconditionError("sweep axis '" + std::string(item) + "' is not of the form pK=lo:hi:step");
    }
    SweepAxis axis;
    const std::string_view bus = item.substr(1, eq - 1);
    const auto [ptr, ec] = std::from_chars(bus.data(), bus.data() + bus.size(), axis.bus);
    if (ec != std::errc() || ptr != bus.data() + bus.size()) {
      throw PreconditionError("bad bus number in sweep axis '" + std::string(item) + "'");
    }
    const std::string_view range = item.substr(eq + 1);
    const std::size_t c1 = range.find(':');
    const std::size_t c2 = c1 == std::string_view::npos ? c1 : range.find(':', c1 + 1);
    if (c2 == std::string_view::npos) {
      throw PreconditionError("sweep axis '" + std::string(item) + "' needs lo:hi:step");
    }
    axis.lo = parse_number(range.substr(0, c1), text);
    axis.hi = parse_number(range.substr(c1 + 1, c2 - c1 - 1), text);
    axis.step = parse_number(range.substr(c2 + 1), text);
    axis.values();
    axes.push_back(axis);
    start = comma + 1;
  }
  return axes;
}

std::vector<SweepAxis> default_sweep_axes() { return {{2, -6.0, 6.0, 0.25}, {3, -4.0, 4.0, 0.25}}; }

SweepRecord solve_sweep_point(const NetworkCase& network, const SweepSpec& spec, const std::vector<double>& targets) {
  SweepRecord rec;
  rec.targets = targets;
  try {
    BuildOptions options;
    options.weight = spec.weight;
    options.include_cost = spec.include_cost;
    for (std::size_t i = 0; i < spec.axes.size(); ++i) options.targets.emplace_back(spec.axes[i].bus, targets[i]);
    const Relaxation relaxation = build_relaxation(network, spec.relaxation, options);
    const RelaxationSolution sol = solve_relaxation(relaxation, spec.settings);
    rec.status = sol.conic.status;
    rec.message = sol.conic.message;
    rec.objective = sol.objective;
    rec.rank = sol.rank;
    rec.exact = sol.exact;
    if (sol.conic.x.size() == static_cast<std::size_t>(relaxation.program.num_vars)) {
      for (const auto& p : relaxation.polys.active) rec.achieved.push_back(relaxation.ly(p, sol.conic.x));
    }
  } catch (const NumericalError& e) {
    rec.status = SolveStatus::NumericalFailure;
    rec.message = e.what();
  }
  if (rec.achieved.empty()) rec.achieved.assign(static_cast<std::size_t>(network.num_buses()), std::nan(""));
  return rec;
}

std::vector<SweepRecord> run_sweep(const NetworkCase& network, const SweepSpec& spec) {
  if (spec.axes.empty()) throw PreconditionError("sweep needs at least one axis");
  if (spec.jobs < 1) throw PreconditionError("sweep needs at least one worker");
  for (const auto& axis : spec.axes) {
    network.bus(axis.bus);
    if (network.bus(axis.bus).is_reference) {
      throw PreconditionError("sweep axis on the reference bus " + std::to_string(axis.bus));
    }
  }
  // Builds once up front so that invalid input fails here, not inside a worker.
  {
    BuildOptions options;
    options.weight = spec.weight;
    for (const auto& axis : spec.axes) options.targets.emplace_back(axis.bus, axis.lo);
    build_relaxation(network, spec.relaxation, options);
  }

  std::vector<std::vector<double>> grid{{}};
  for (const auto& axis : spec.axes) {
    std::vector<std::vector<double>> next;
    for (const auto& prefix : grid) {
      for (double v : axis.values()) {
        next.push_back(prefix);
        next.back().push_back(v);
      }
    }
    grid = std::move(next);
  }

  std::vector<SweepRecord> records(grid.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&]() {
    for (std::size_t i = next++; i < grid.size(); i = next++) records[i] = solve_sweep_point(network, spec, grid[i]);
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(spec.jobs), grid.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  return records;
}

void write_sweep_csv(std::ostream& out, const NetworkCase& network, const SweepSpec& spec,
                     const std::vector<SweepRecord>& records) {
  out << "# opfrelax sweep case=" << network.name << " relaxation=" << spec.relaxation.to_string()
      << " weight=" << number(spec.weight) << '\n';
  for (const auto& axis : spec.axes) out << 'p' << axis.bus << "_target,";
  for (const Bus& bus : network.buses) out << 'p' << bus.id << ',';
  out << "objective,rank,exact,status\n";
  for (const auto& r : records) {
    for (double t : r.targets) out << number(t) << ',';
    for (double p : r.achieved) out << number(p) << ',';
    out << number(r.objective) << ',' << r.rank << ',' << (r.exact ? "true" : "false") << ',' << to_string(r.status)
        << '\n';
  }
}

void write_sweep_json(std::ostream& out, const NetworkCase& network, const SweepSpec& spec,
                      const std::vector<SweepRecord>& records) {
  nlohmann::ordered_json doc;
  doc["case"] = network.name;
  doc["relaxation"] = spec.relaxation.to_string();
  doc["weight"] = spec.weight;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    nlohmann::ordered_json row;
    for (std::size_t i = 0; i < spec.axes.size(); ++i) {
      row["p" + std::to_string(spec.axes[i].bus) + "_target"] = r.targets[i];
    }
    for (std::size_t k = 0; k < r.achieved.size(); ++k) {
      if (std::isfinite(r.achieved[k])) row["p" + std::to_string(k + 1)] = r.achieved[k];
      else row["p" + std::to_string(k + 1)] = nullptr;
    }
    row["objective"] = r.objective;
    row["rank"] = r.rank;
    row["exact"] = r.exact;
    row["status"] = to_string(r.status);
    rows.push_back(std::move(row));
  }
  doc["records"] = std::move(rows);
  out << doc.dump(2) << '\n';
}

}  // namespace opfrelax
