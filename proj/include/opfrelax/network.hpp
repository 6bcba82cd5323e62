#pragma once

#include <complex>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "opfrelax/errors.hpp"

namespace opfrelax {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

struct Bus {
  int id = 0;  // 1-based
  double load_p = 0.0;
  double load_q = 0.0;
  std::optional<double> v_min;
  std::optional<double> v_max;
  bool is_reference = false;
};

struct Generator {
  int bus = 0;
  std::optional<double> p_min;
  std::optional<double> p_max;
  std::optional<double> q_min;
  std::optional<double> q_max;
  // cost(P) = c2 P^2 + c1 P + c0
  double cost_c2 = 0.0;
  double cost_c1 = 0.0;
  double cost_c0 = 0.0;

  bool has_cost() const { return cost_c2 != 0.0 || cost_c1 != 0.0 || cost_c0 != 0.0; }
};

/// Pi-model line in series with an ideal transformer tau*e^{j*shift}:1 on the from side.
struct Branch {
  int from = 0;
  int to = 0;
  double r = 0.0;
  double x = 0.0;
  double b_sh = 0.0;  // total shunt susceptance, split evenly between the ends
  double tau = 1.0;
  double shift = 0.0;  // radians
  std::optional<double> s_max;

  /// g + jb = 1 / (r + jx)
  Complex series_admittance() const { return 1.0 / Complex(r, x); }
  bool is_plain_series() const { return b_sh == 0.0 && tau == 1.0 && shift == 0.0; }
};

/// Closed interval with optional ends. Absent ends emit no constraint.
struct Bounds {
  std::optional<double> lo;
  std::optional<double> hi;

  bool is_equality() const { return lo && hi && *lo == *hi; }
  bool is_free() const { return !lo && !hi; }
};

struct NetworkCase {
  std::string name;
  std::vector<Bus> buses;  // sorted by id; buses[k].id == k + 1
  std::vector<Generator> generators;
  std::vector<Branch> branches;

  int num_buses() const { return static_cast<int>(buses.size()); }
  const Bus& bus(int id) const;
  const Generator* generator_at(int bus_id) const;
  int reference_bus() const;

  /// Bounds on the generation f_Pk at a bus; buses without a generator are pinned to zero.
  Bounds active_bounds(int bus_id) const;
  Bounds reactive_bounds(int bus_id) const;
  /// Bounds on the squared voltage magnitude f_Vk.
  Bounds voltage_sq_bounds(int bus_id) const;
};

/// Checks every data-model invariant; throws ValidationError naming the first failure.
void validate(const NetworkCase& network);

/// Parses a JSON case document and validates it.
NetworkCase load_case(std::string_view document);
NetworkCase load_case_file(const std::filesystem::path& path);
/// Serializes a case back to the JSON schema accepted by load_case.
std::string dump_case(const NetworkCase& network);

/// Bus admittance matrix Y = G + jB, transformer on the from side of each branch.
ComplexMatrix admittance_matrix(const NetworkCase& network);

/// Complex power injections S_k = V_k * conj(sum_i Y_ki V_i) (network side, no loads).
std::vector<Complex> bus_injections(const ComplexMatrix& y, const std::vector<Complex>& voltages);

/// Eliminates a zero-injection bus by Schur complement and re-expresses the
/// result as equivalent branches. Remaining buses are renumbered 1..n-1 in order.
NetworkCase kron_reduce(const NetworkCase& network, int bus_id);

/// Copy of the case with the active-power bounds of the given buses removed. A bus
/// without a generator gets a zero-cost one with its reactive output pinned to zero.
NetworkCase release_active_power(const NetworkCase& network, const std::vector<int>& buses);

/// Voltages of the eliminated bus implied by a solution of the reduced case.
/// `reduced_voltages` is indexed by the original bus order with the eliminated bus skipped.
Complex kron_recover_voltage(const NetworkCase& original, int bus_id,
                             const std::vector<Complex>& reduced_voltages);

}  // namespace opfrelax
