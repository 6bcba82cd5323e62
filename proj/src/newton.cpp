#include <cmath>

#include "opfrelax/recover.hpp"

namespace opfrelax {

namespace {

enum class BusType { Slack, PV, PQ };

struct BusSpec {
  BusType type = BusType::PQ;
  double p = 0.0;  // net injection P_G - P_D
  double q = 0.0;
  double vm = 1.0;
};

double pinned(const Bounds& b) { return b.is_equality() ? *b.lo : 0.0; }

std::vector<BusSpec> classify(const NetworkCase& network) {
  std::vector<BusSpec> out;
  for (const Bus& bus : network.buses) {
    BusSpec s;
    const Bounds v = network.voltage_sq_bounds(bus.id);
    const Bounds p = network.active_bounds(bus.id);
    const Bounds q = network.reactive_bounds(bus.id);
    if (v.is_equality()) s.vm = std::sqrt(*v.lo);
    s.p = pinned(p) - bus.load_p;
    s.q = pinned(q) - bus.load_q;
    if (bus.is_reference) {
      if (!v.is_equality()) throw PreconditionError("newton: the reference bus needs a fixed voltage magnitude");
      s.type = BusType::Slack;
    } else if (v.is_equality() && p.is_equality()) {
      s.type = BusType::PV;
    } else if (p.is_equality() && q.is_equality()) {
      s.type = BusType::PQ;
    } else {
      throw PreconditionError("newton: bus " + std::to_string(bus.id) + " is neither PV nor PQ");
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace

std::vector<Complex> flat_start(const NetworkCase& network) {
  std::vector<Complex> v;
  for (const Bus& bus : network.buses) {
    const Bounds b = network.voltage_sq_bounds(bus.id);
    v.emplace_back(b.is_equality() ? std::sqrt(*b.lo) : 1.0, 0.0);
  }
  return v;
}

NewtonResult newton_power_flow(const NetworkCase& network, std::span<const Complex> start, double tol,
                               int max_iterations) {
  validate(network);
  const int n = network.num_buses();
  if (static_cast<int>(start.size()) != n) throw std::invalid_argument("newton: start has the wrong length");
  const std::vector<BusSpec> spec = classify(network);
  const ComplexMatrix y = admittance_matrix(network);

  Eigen::VectorXd va(n), vm(n);
  const double ref_angle = std::arg(start[static_cast<std::size_t>(network.reference_bus() - 1)]);
  for (int k = 0; k < n; ++k) {
    va(k) = std::arg(start[static_cast<std::size_t>(k)]) - ref_angle;
    vm(k) = spec[static_cast<std::size_t>(k)].type == BusType::PQ ? std::abs(start[static_cast<std::size_t>(k)])
                                                                   : spec[static_cast<std::size_t>(k)].vm;
  }

  // Unknowns: angles of PV and PQ buses, then magnitudes of PQ buses.
  std::vector<int> ang, mag;
  for (int k = 0; k < n; ++k) {
    if (spec[static_cast<std::size_t>(k)].type != BusType::Slack) ang.push_back(k);
    if (spec[static_cast<std::size_t>(k)].type == BusType::PQ) mag.push_back(k);
  }
  const auto na = static_cast<Eigen::Index>(ang.size());
  const auto nm = static_cast<Eigen::Index>(mag.size());

  NewtonResult res;
  const auto phasors = [&]() {
    Eigen::VectorXcd v(n);
    for (int k = 0; k < n; ++k) v(k) = std::polar(vm(k), va(k));
    return v;
  };
  const auto mismatch = [&](const Eigen::VectorXcd& v) {
    const Eigen::VectorXcd s = v.cwiseProduct((y * v).conjugate());
    Eigen::VectorXd f(na + nm);
    for (Eigen::Index i = 0; i < na; ++i) f(i) = s(ang[static_cast<std::size_t>(i)]).real() - spec[static_cast<std::size_t>(ang[static_cast<std::size_t>(i)])].p;
    for (Eigen::Index i = 0; i < nm; ++i) f(na + i) = s(mag[static_cast<std::size_t>(i)]).imag() - spec[static_cast<std::size_t>(mag[static_cast<std::size_t>(i)])].q;
    return f;
  };

  for (int iter = 0;; ++iter) {
    const Eigen::VectorXcd v = phasors();
    const Eigen::VectorXd f = mismatch(v);
    res.iterations = iter;
    res.mismatch = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
    if (!std::isfinite(res.mismatch)) {
      res.message = "diverged (non-finite mismatch)";
      break;
    }
    if (res.mismatch < tol) {
      res.converged = true;
      res.message = "converged";
      break;
    }
    if (iter == max_iterations) {
      res.message = "no convergence within the iteration limit";
      break;
    }

    // dS/dVa = j diag(V) conj(diag(I) - Y diag(V)), dS/dVm = diag(V) conj(Y diag(V/|V|)) + conj(diag(I)) diag(V/|V|)
    const Eigen::VectorXcd current = y * v;
    const Eigen::VectorXcd unit = v.array() / vm.array().cast<Complex>();
    ComplexMatrix ds_dva = -(v.asDiagonal() * (y * v.asDiagonal()).conjugate());
    ds_dva.diagonal() += v.cwiseProduct(current.conjugate());
    ds_dva *= Complex(0.0, 1.0);
    ComplexMatrix ds_dvm = v.asDiagonal() * (y * unit.asDiagonal()).conjugate();
    ds_dvm.diagonal() += current.conjugate().cwiseProduct(unit);

    Eigen::MatrixXd jac(na + nm, na + nm);
    for (Eigen::Index r = 0; r < na + nm; ++r) {
      const bool p_row = r < na;
      const int bus = p_row ? ang[static_cast<std::size_t>(r)] : mag[static_cast<std::size_t>(r - na)];
      for (Eigen::Index c = 0; c < na + nm; ++c) {
        const Complex d = c < na ? ds_dva(bus, ang[static_cast<std::size_t>(c)])
                                 : ds_dvm(bus, mag[static_cast<std::size_t>(c - na)]);
        jac(r, c) = p_row ? d.real() : d.imag();
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    if (!lu.isInvertible()) {
      res.message = "singular Jacobian";
      break;
    }
    const Eigen::VectorXd dx = lu.solve(-f);
    for (Eigen::Index i = 0; i < na; ++i) va(ang[static_cast<std::size_t>(i)]) += dx(i);
    for (Eigen::Index i = 0; i < nm; ++i) vm(mag[static_cast<std::size_t>(i)]) += dx(na + i);
  }
  const Eigen::VectorXcd v = phasors();
  res.voltages.assign(v.data(), v.data() + v.size());
  return res;
}

}  // namespace opfrelax
