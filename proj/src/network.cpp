#include "opfrelax/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <sstream>

namespace opfrelax {

namespace {

bool finite_or_absent(const std::optional<double>& v) { return !v || std::isfinite(*v); }

std::string bus_label(int id) { return "bus " + std::to_string(id); }

}  // namespace

const Bus& NetworkCase::bus(int id) const {
  if (id < 1 || id > num_buses()) {
    throw std::out_of_range("no " + bus_label(id) + " in case '" + name + "'");
  }
  return buses[static_cast<std::size_t>(id - 1)];
}

const Generator* NetworkCase::generator_at(int bus_id) const {
  for (const auto& g : generators) {
    if (g.bus == bus_id) return &g;
  }
  return nullptr;
}

int NetworkCase::reference_bus() const {
  for (const auto& b : buses) {
    if (b.is_reference) return b.id;
  }
  throw ValidationError("case '" + name + "' has no reference bus");
}

Bounds NetworkCase::active_bounds(int bus_id) const {
  if (const auto* g = generator_at(bus_id)) return {g->p_min, g->p_max};
  return {0.0, 0.0};
}

Bounds NetworkCase::reactive_bounds(int bus_id) const {
  if (const auto* g = generator_at(bus_id)) return {g->q_min, g->q_max};
  return {0.0, 0.0};
}

Bounds NetworkCase::voltage_sq_bounds(int bus_id) const {
  const Bus& b = bus(bus_id);
  Bounds out;
  if (b.v_min) out.lo = *b.v_min * *b.v_min;
  if (b.v_max) out.hi = *b.v_max * *b.v_max;
  return out;
}

void validate(const NetworkCase& network) {
  const int n = network.num_buses();
  if (n == 0) throw ValidationError("case has no buses");

  int references = 0;
  for (int k = 0; k < n; ++k) {
    const Bus& b = network.buses[static_cast<std::size_t>(k)];
    if (b.id != k + 1) {
      throw ValidationError("bus ids must be 1.." + std::to_string(n) +
                            " without gaps or duplicates (found id " + std::to_string(b.id) + ")");
    }
    if (!std::isfinite(b.load_p) || !std::isfinite(b.load_q) || !finite_or_absent(b.v_min) ||
        !finite_or_absent(b.v_max)) {
      throw ValidationError(bus_label(b.id) + ": non-finite value");
    }
    if (b.v_min && b.v_max && *b.v_min > *b.v_max) {
      throw ValidationError(bus_label(b.id) + ": v_min > v_max");
    }
    if ((b.v_min && *b.v_min < 0.0) || (b.v_max && *b.v_max < 0.0)) {
      throw ValidationError(bus_label(b.id) + ": negative voltage bound");
    }
    if (b.is_reference) ++references;
  }
  if (references != 1) {
    throw ValidationError("exactly one reference bus required, found " + std::to_string(references));
  }

  std::vector<int> gens_per_bus(static_cast<std::size_t>(n), 0);
  for (const auto& g : network.generators) {
    if (g.bus < 1 || g.bus > n) {
      throw ValidationError("generator references unknown " + bus_label(g.bus));
    }
    if (++gens_per_bus[static_cast<std::size_t>(g.bus - 1)] > 1) {
      throw ValidationError(bus_label(g.bus) + ": more than one generator (unsupported)");
    }
    if (!finite_or_absent(g.p_min) || !finite_or_absent(g.p_max) || !finite_or_absent(g.q_min) ||
        !finite_or_absent(g.q_max) || !std::isfinite(g.cost_c2) || !std::isfinite(g.cost_c1) ||
        !std::isfinite(g.cost_c0)) {
      throw ValidationError("generator at " + bus_label(g.bus) + ": non-finite value");
    }
    if (g.p_min && g.p_max && *g.p_min > *g.p_max) {
      throw ValidationError("generator at " + bus_label(g.bus) + ": p_min > p_max");
    }
    if (g.q_min && g.q_max && *g.q_min > *g.q_max) {
      throw ValidationError("generator at " + bus_label(g.bus) + ": q_min > q_max");
    }
    if (g.cost_c2 < 0.0) {
      throw ValidationError("generator at " + bus_label(g.bus) + ": cost_c2 < 0 (non-convex cost)");
    }
  }

  std::vector<std::vector<int>> adjacency(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < network.branches.size(); ++i) {
    const Branch& br = network.branches[i];
    const std::string where = "branch " + std::to_string(i) + " (" + std::to_string(br.from) +
                              "," + std::to_string(br.to) + ")";
    if (br.from < 1 || br.from > n || br.to < 1 || br.to > n) {
      throw ValidationError(where + ": references a bus that does not exist");
    }
    if (br.from == br.to) throw ValidationError(where + ": from == to");
    if (!std::isfinite(br.r) || !std::isfinite(br.x) || !std::isfinite(br.b_sh) ||
        !std::isfinite(br.tau) || !std::isfinite(br.shift) || !finite_or_absent(br.s_max)) {
      throw ValidationError(where + ": non-finite value");
    }
    if (br.tau <= 0.0) throw ValidationError(where + ": tau must be positive");
    if (br.r == 0.0 && br.x == 0.0) throw ValidationError(where + ": zero series impedance");
    if (br.s_max && *br.s_max < 0.0) throw ValidationError(where + ": negative s_max");
    adjacency[static_cast<std::size_t>(br.from - 1)].push_back(br.to - 1);
    adjacency[static_cast<std::size_t>(br.to - 1)].push_back(br.from - 1);
  }

  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  int reached = 1;
  while (!frontier.empty()) {
    const int k = frontier.front();
    frontier.pop();
    for (int m : adjacency[static_cast<std::size_t>(k)]) {
      if (!seen[static_cast<std::size_t>(m)]) {
        seen[static_cast<std::size_t>(m)] = true;
        ++reached;
        frontier.push(m);
      }
    }
  }
  if (reached != n) throw ValidationError("network graph is not connected");
}

ComplexMatrix admittance_matrix(const NetworkCase& network) {
  validate(network);
  const int n = network.num_buses();
  ComplexMatrix y = ComplexMatrix::Zero(n, n);
  const Complex j(0.0, 1.0);
  for (const Branch& br : network.branches) {
    const int l = br.from - 1;
    const int m = br.to - 1;
    const Complex ys = br.series_admittance();
    const Complex half_shunt = j * (br.b_sh / 2.0);
    const Complex phase = std::polar(1.0, br.shift);
    y(l, l) += (ys + half_shunt) / (br.tau * br.tau);
    y(m, m) += ys + half_shunt;
    y(l, m) -= ys * phase / br.tau;
    y(m, l) -= ys * std::conj(phase) / br.tau;
  }
  return y;
}

std::vector<Complex> bus_injections(const ComplexMatrix& y, const std::vector<Complex>& voltages) {
  const auto n = static_cast<Eigen::Index>(voltages.size());
  if (y.rows() != n || y.cols() != n) {
    throw std::invalid_argument("bus_injections: dimension mismatch");
  }
  Eigen::Map<const Eigen::VectorXcd> v(voltages.data(), n);
  const Eigen::VectorXcd current = y * v;
  std::vector<Complex> s(voltages.size());
  for (Eigen::Index k = 0; k < n; ++k) s[static_cast<std::size_t>(k)] = v(k) * std::conj(current(k));
  return s;
}

namespace {

void check_eliminable(const NetworkCase& network, int bus_id) {
  const Bus& b = network.bus(bus_id);
  const std::string who = "kron_reduce: bus " + std::to_string(bus_id);
  if (b.is_reference) throw PreconditionError(who + " is the reference bus");
  if (b.load_p != 0.0 || b.load_q != 0.0) throw PreconditionError(who + " carries load");
  if (b.v_min || b.v_max) throw PreconditionError(who + " has voltage bounds");
  if (const auto* g = network.generator_at(bus_id)) {
    const bool pinned_zero = g->p_min == 0.0 && g->p_max == 0.0 && g->q_min == 0.0 && g->q_max == 0.0;
    if (!pinned_zero) throw PreconditionError(who + " has a generator with nonzero injection bounds");
  }
  for (const Branch& br : network.branches) {
    if ((br.from == bus_id || br.to == bus_id) && !br.is_plain_series()) {
      throw PreconditionError(who + " has an incident branch with shunt or transformer elements");
    }
  }
}

}  // namespace

NetworkCase kron_reduce(const NetworkCase& network, int bus_id) {
  validate(network);
  check_eliminable(network, bus_id);

  // Neighbours of the eliminated bus and the series admittance to each (parallel branches summed).
  std::map<int, Complex> to_neighbour;
  for (const Branch& br : network.branches) {
    if (br.from == bus_id) to_neighbour[br.to] += br.series_admittance();
    if (br.to == bus_id) to_neighbour[br.from] += br.series_admittance();
  }
  Complex y_bb = 0.0;
  for (const auto& [k, y] : to_neighbour) y_bb += y;
  if (std::abs(y_bb) < 1e-12) throw NumericalError("kron_reduce: singular self-admittance");

  // Schur complement restricted to the neighbour set. For plain series branches the
  // equivalent between neighbours i and k has admittance y_i * y_k / y_bb and no shunt.
  auto renumber = [bus_id](int id) { return id < bus_id ? id : id - 1; };

  NetworkCase out;
  out.name = network.name + "-kron" + std::to_string(bus_id);
  for (const Bus& b : network.buses) {
    if (b.id == bus_id) continue;
    Bus nb = b;
    nb.id = renumber(b.id);
    out.buses.push_back(nb);
  }
  for (const Generator& g : network.generators) {
    if (g.bus == bus_id) continue;
    Generator ng = g;
    ng.bus = renumber(g.bus);
    out.generators.push_back(ng);
  }

  // Pairwise admittances to be merged: only plain series branches without limits are merged.
  std::map<std::pair<int, int>, Complex> merged;
  for (const Branch& br : network.branches) {
    if (br.from == bus_id || br.to == bus_id) continue;
    if (br.is_plain_series() && !br.s_max) {
      const auto key = std::minmax(br.from, br.to);
      merged[{key.first, key.second}] += br.series_admittance();
    } else {
      Branch nb = br;
      nb.from = renumber(br.from);
      nb.to = renumber(br.to);
      out.branches.push_back(nb);
    }
  }
  for (auto it = to_neighbour.begin(); it != to_neighbour.end(); ++it) {
    for (auto jt = std::next(it); jt != to_neighbour.end(); ++jt) {
      merged[{it->first, jt->first}] += it->second * jt->second / y_bb;
    }
  }
  for (const auto& [key, y] : merged) {
    if (std::abs(y) < 1e-14) continue;
    const Complex z = 1.0 / y;
    Branch nb;
    nb.from = renumber(key.first);
    nb.to = renumber(key.second);
    nb.r = z.real();
    nb.x = z.imag();
    out.branches.push_back(nb);
  }
  validate(out);
  return out;
}

Complex kron_recover_voltage(const NetworkCase& original, int bus_id,
                             const std::vector<Complex>& reduced_voltages) {
  if (static_cast<int>(reduced_voltages.size()) != original.num_buses() - 1) {
    throw std::invalid_argument("kron_recover_voltage: expected " +
                                std::to_string(original.num_buses() - 1) + " voltages");
  }
  Complex y_bb = 0.0;
  Complex weighted = 0.0;
  for (const Branch& br : original.branches) {
    int other = 0;
    if (br.from == bus_id) other = br.to;
    else if (br.to == bus_id) other = br.from;
    else continue;
    const Complex y = br.series_admittance();
    y_bb += y;
    const int reduced_index = other < bus_id ? other - 1 : other - 2;
    weighted += y * reduced_voltages[static_cast<std::size_t>(reduced_index)];
  }
  if (std::abs(y_bb) < 1e-12) throw NumericalError("kron_recover_voltage: singular self-admittance");
  return weighted / y_bb;
}

NetworkCase release_active_power(const NetworkCase& network, const std::vector<int>& buses) {
  NetworkCase out = network;
  for (int id : buses) {
    out.bus(id);
    auto it = std::find_if(out.generators.begin(), out.generators.end(), [id](const Generator& g) { return g.bus == id; });
    if (it == out.generators.end()) {
      Generator g;
      g.bus = id;
      g.q_min = 0.0;
      g.q_max = 0.0;
      out.generators.push_back(g);
      std::sort(out.generators.begin(), out.generators.end(),
                [](const Generator& a, const Generator& b) { return a.bus < b.bus; });
    } else {
      it->p_min.reset();
      it->p_max.reset();
    }
  }
  return out;
}

}  // namespace opfrelax
