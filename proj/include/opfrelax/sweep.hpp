#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "opfrelax/hierarchy.hpp"
#include "opfrelax/network.hpp"
#include "opfrelax/recover.hpp"

namespace opfrelax {

/// Grid lo, lo + step, ... up to hi on the active-power injection of one bus.
struct SweepAxis {
  int bus = 0;
  double lo = 0.0;
  double hi = 0.0;
  double step = 1.0;

  std::vector<double> values() const;
};

struct SweepSpec {
  std::vector<SweepAxis> axes;  // first axis is the outer loop
  RelaxationSpec relaxation;
  double weight = 1e3;
  bool include_cost = true;
  RecoverSettings settings;
  int jobs = 1;
};

/// Parses "p2=-6:6:0.25,p3=-4:4:0.25".
std::vector<SweepAxis> parse_sweep_axes(std::string_view text);

/// Default 49 x 33 grid over P2 in [-6, 6] and P3 in [-4, 4].
std::vector<SweepAxis> default_sweep_axes();

struct SweepRecord {
  std::vector<double> targets;   // one per axis
  std::vector<double> achieved;  // L_y{f_Pk} for every bus
  double objective = 0.0;
  int rank = 0;
  bool exact = false;
  SolveStatus status = SolveStatus::NumericalFailure;
  std::string message;

  bool converged() const { return status == SolveStatus::Optimal; }
};

/// Solves one grid point: P bounds of the swept buses released, objective cost + weight * sum (P_k - target_k)^2.
SweepRecord solve_sweep_point(const NetworkCase& network, const SweepSpec& spec, const std::vector<double>& targets);

/// Every grid point, in grid order, on a pool of spec.jobs workers.
std::vector<SweepRecord> run_sweep(const NetworkCase& network, const SweepSpec& spec);

void write_sweep_csv(std::ostream& out, const NetworkCase& network, const SweepSpec& spec,
                     const std::vector<SweepRecord>& records);
void write_sweep_json(std::ostream& out, const NetworkCase& network, const SweepSpec& spec,
                      const std::vector<SweepRecord>& records);

}  // namespace opfrelax
