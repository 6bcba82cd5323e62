#include <cmath>
#include <cstdio>
#include <set>

#include "opfrelax/hierarchy.hpp"

namespace opfrelax {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct Context {
  const NetworkCase& network;
  const OpfPolynomials& polys;
  const BuildOptions& options;
  LiftedProgramBuilder& b;
  std::vector<std::pair<int, Polynomial>>& auxiliary;
  bool explicit_first_order = false;

  int order() const { return b.spec().order; }

  void inequality(const Polynomial& g, const std::string& label) {
    if (explicit_first_order) {
      b.add_cone(ConeKind::NonNegative, {b.ly(g)}, label);
    } else {
      b.add_inequality(g, label);
    }
  }

  void equality(const Polynomial& g, const std::string& label) {
    if (explicit_first_order) {
      b.add_scalar_equality(b.ly(g), label);
    } else {
      b.add_equality(g, label);
    }
  }

  void bounds(const Polynomial& f, const Bounds& bnd, const std::string& name) {
    if (bnd.is_equality()) {
      equality(f - *bnd.lo, name + " = " + fmt(*bnd.lo));
      return;
    }
    if (bnd.lo) inequality(f - *bnd.lo, name + " >= " + fmt(*bnd.lo));
    if (bnd.hi) inequality(*bnd.hi - f, name + " <= " + fmt(*bnd.hi));
  }

  void cost() {
    for (const auto& gen : network.generators) {
      const Polynomial& fp = polys.p(gen.bus);
      const std::string bus = std::to_string(gen.bus);
      if (gen.cost_c2 == 0.0) {
        b.add_objective(b.ly(gen.cost_c1 * fp + gen.cost_c0));
        continue;
      }
      const int omega = b.add_auxiliary("omega_" + bus);
      auxiliary.emplace_back(omega, polys.c(gen.bus));
      b.add_objective(AffineExpr::variable(omega));
      const AffineExpr lin = b.ly(gen.cost_c1 * fp + gen.cost_c0);
      const AffineExpr w = AffineExpr::variable(omega);
      AffineExpr u = w - lin;
      u.constant += 1.0;
      AffineExpr v = lin - w;
      v.constant += 1.0;
      b.add_cone(ConeKind::SecondOrder, {u, v, 2.0 * std::sqrt(gen.cost_c2) * b.ly(fp)}, "cost " + bus);
      if (order() >= 2) b.add_scalar_equality(b.ly(polys.c(gen.bus)) - w, "L(f_C" + bus + ") = omega_" + bus);
    }
  }

  void flows() {
    for (std::size_t i = 0; i < network.branches.size(); ++i) {
      const Branch& br = network.branches[i];
      if (!br.s_max) continue;
      const auto& f = polys.flows[i];
      const double s = *br.s_max;
      const std::string name = std::to_string(br.from) + "-" + std::to_string(br.to);
      b.add_cone(ConeKind::SecondOrder, {AffineExpr::constant_value(s), b.ly(f.p_from), b.ly(f.q_from)},
                 "flow " + name);
      b.add_cone(ConeKind::SecondOrder, {AffineExpr::constant_value(s), b.ly(f.p_to), b.ly(f.q_to)},
                 "flow " + std::to_string(br.to) + "-" + std::to_string(br.from));
      if (order() >= 2 && !explicit_first_order) {
        b.add_inequality(s * s - f.s_from(), "|S " + name + "|^2 <= " + fmt(s * s));
        b.add_inequality(s * s - f.s_to(), "|S " + std::to_string(br.to) + "-" + std::to_string(br.from) +
                                               "|^2 <= " + fmt(s * s));
      }
    }
  }

  void targets() {
    if (options.targets.empty()) return;
    const std::size_t nv = polys.layout.num_vars();
    const int tau = b.add_auxiliary("tau");
    const double sw = std::sqrt(options.weight);
    Polynomial penalty(nv);
    AffineExpr one_plus = AffineExpr::variable(tau);
    one_plus.constant = 1.0;
    AffineExpr one_minus = AffineExpr::variable(tau, -1.0);
    one_minus.constant = 1.0;
    std::vector<AffineExpr> entries{one_plus, one_minus};
    for (const auto& [bus, target] : options.targets) {
      const Polynomial dev = polys.p(bus) - target;
      penalty += dev * dev;
      entries.push_back(2.0 * sw * b.ly(dev));
    }
    auxiliary.emplace_back(tau, options.weight * penalty);
    b.add_cone(ConeKind::SecondOrder, std::move(entries), "tracking");
    b.add_objective(AffineExpr::variable(tau));
  }

  void network_constraints() {
    for (const Bus& bus : network.buses) {
      const std::string k = std::to_string(bus.id);
      bounds(polys.v(bus.id), network.voltage_sq_bounds(bus.id), "V" + k + "^2");
      bounds(polys.p(bus.id), network.active_bounds(bus.id), "P" + k);
      bounds(polys.q(bus.id), network.reactive_bounds(bus.id), "Q" + k);
    }
    flows();
  }
};

void check_targets(const NetworkCase& network, const BuildOptions& options) {
  std::set<int> seen;
  for (const auto& [bus, target] : options.targets) {
    if (bus < 1 || bus > network.num_buses()) {
      throw PreconditionError("tracking target on unknown bus " + std::to_string(bus));
    }
    if (!seen.insert(bus).second) throw PreconditionError("duplicate tracking target on bus " + std::to_string(bus));
    if (!std::isfinite(target)) throw PreconditionError("tracking target must be finite");
  }
  if (!(options.weight > 0.0) || !std::isfinite(options.weight)) {
    throw PreconditionError("tracking weight must be positive");
  }
}

}  // namespace

Relaxation build_relaxation(const NetworkCase& network, RelaxationSpec spec, const BuildOptions& options) {
  validate(network);
  check_targets(network, options);

  Relaxation r;
  r.spec = spec;
  std::vector<int> released;
  for (const auto& [bus, target] : options.targets) released.push_back(bus);
  r.network = release_active_power(network, released);
  r.polys = build_opf_polynomials(network);
  const auto polys = r.polys.all();
  const bool even = options.even_reduction && even_reduction_applies(polys);

  LiftedProgramBuilder b(r.polys.layout.num_vars(), spec, even);
  Context ctx{r.network, r.polys, options, b, r.auxiliary, spec.kind == RelaxationKind::FirstOrder};
  if (options.targets.empty() || options.include_cost) ctx.cost();
  ctx.targets();
  ctx.network_constraints();

  r.index = b.index();
  r.even_reduced = b.even_reduced();
  r.slot_var = b.slot_variables();
  if (spec.kind != RelaxationKind::FirstOrder) {
    r.program = b.finish();
    return r;
  }

  // Explicit first-order assembly: y0 >= 0 and PSD on L_y{x x'} (the full M_1 without the reduction).
  const SymbolicMatrix m = moment_matrix(b.index(), 1);
  const int first = b.even_reduced() ? 1 : 0;
  if (first == 1) b.add_cone(ConeKind::NonNegative, {b.ly(m.at(0, 0))}, "y0");
  const int k = static_cast<int>(m.size()) - first;
  std::vector<AffineExpr> packed;
  for (int j = first; j < static_cast<int>(m.size()); ++j) {
    for (int i = j; i < static_cast<int>(m.size()); ++i) {
      packed.push_back(b.ly(m.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j))));
    }
  }
  ConicProgram program = b.take_program();
  program.add_psd(k, std::move(packed), "W");
  AffineExpr y0 = AffineExpr::variable(r.slot_var[0]);
  y0.constant = -1.0;
  program.add_equality(std::move(y0), "y0 = 1");
  program.check();
  r.program = std::move(program);
  return r;
}

Relaxation build_first_order(const NetworkCase& network) {
  return build_relaxation(network, {RelaxationKind::FirstOrder, 1});
}

Relaxation build_moment(const NetworkCase& network, int gamma) {
  if (gamma < 1) throw std::invalid_argument("moment relaxation needs order >= 1");
  return build_relaxation(network, {RelaxationKind::Moment, gamma});
}

Relaxation build_mixed(const NetworkCase& network, int gamma) {
  if (gamma < 2) throw std::invalid_argument("mixed relaxation needs order >= 2");
  return build_relaxation(network, {RelaxationKind::Mixed, gamma});
}

std::vector<double> Relaxation::lift(std::span<const Complex> voltages) const {
  const std::vector<double> point = polys.layout.to_point(voltages);
  const std::vector<double> y = lift_moments(index, point);
  std::vector<double> x(static_cast<std::size_t>(program.num_vars), 0.0);
  for (std::size_t s = 0; s < y.size(); ++s) {
    if (slot_var[s] >= 0) x[static_cast<std::size_t>(slot_var[s])] = y[s];
  }
  for (const auto& [var, p] : auxiliary) x[static_cast<std::size_t>(var)] = p.eval(point);
  return x;
}

std::vector<double> Relaxation::moments(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(program.num_vars)) {
    throw std::invalid_argument("moments: point has " + std::to_string(x.size()) + " entries, program has " +
                                std::to_string(program.num_vars) + " variables");
  }
  std::vector<double> y(index.num_slots(), 0.0);
  for (std::size_t s = 0; s < y.size(); ++s) {
    if (slot_var[s] >= 0) y[s] = x[static_cast<std::size_t>(slot_var[s])];
  }
  return y;
}

double Relaxation::ly(const Polynomial& p, std::span<const double> x) const {
  return apply_ly(p, index).eval(moments(x));
}

Eigen::MatrixXd Relaxation::second_moment_matrix(std::span<const double> x) const {
  const std::vector<double> y = moments(x);
  const std::size_t nv = index.num_vars();
  Eigen::MatrixXd w(nv, nv);
  for (std::size_t i = 0; i < nv; ++i) {
    for (std::size_t j = 0; j < nv; ++j) {
      w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          y[index.slot(Exponent::unit(nv, i) + Exponent::unit(nv, j))];
    }
  }
  return w;
}

}  // namespace opfrelax
