#include <cmath>

#include "opfrelax/poly.hpp"

namespace opfrelax {

VoltageLayout::VoltageLayout(int num_buses, int reference_bus)
    : num_buses_(num_buses), reference_(reference_bus) {
  if (num_buses < 1) throw std::invalid_argument("VoltageLayout: need at least one bus");
  if (reference_bus < 1 || reference_bus > num_buses) {
    throw std::invalid_argument("VoltageLayout: reference bus out of range");
  }
}

std::size_t VoltageLayout::vd(int bus_id) const {
  if (bus_id < 1 || bus_id > num_buses_) throw std::out_of_range("VoltageLayout: bad bus id");
  return static_cast<std::size_t>(bus_id - 1);
}

std::optional<std::size_t> VoltageLayout::vq(int bus_id) const {
  if (bus_id < 1 || bus_id > num_buses_) throw std::out_of_range("VoltageLayout: bad bus id");
  if (bus_id == reference_) return std::nullopt;
  const int skip = bus_id > reference_ ? 1 : 0;
  return static_cast<std::size_t>(num_buses_ + bus_id - 1 - skip);
}

std::vector<std::string> VoltageLayout::names() const {
  std::vector<std::string> out;
  for (int k = 1; k <= num_buses_; ++k) out.push_back("V_d" + std::to_string(k));
  for (int k = 1; k <= num_buses_; ++k) {
    if (k != reference_) out.push_back("V_q" + std::to_string(k));
  }
  return out;
}

std::vector<double> VoltageLayout::to_point(std::span<const Complex> voltages) const {
  if (static_cast<int>(voltages.size()) != num_buses_) {
    throw std::invalid_argument("VoltageLayout::to_point: wrong number of phasors");
  }
  const Complex ref = voltages[static_cast<std::size_t>(reference_ - 1)];
  const Complex rotate = std::abs(ref) > 0.0 ? std::conj(ref) / std::abs(ref) : Complex(1.0, 0.0);
  std::vector<double> point(num_vars(), 0.0);
  for (int k = 1; k <= num_buses_; ++k) {
    const Complex v = voltages[static_cast<std::size_t>(k - 1)] * rotate;
    point[vd(k)] = v.real();
    if (auto q = vq(k)) point[*q] = v.imag();
  }
  return point;
}

std::vector<Complex> VoltageLayout::to_phasors(std::span<const double> point) const {
  if (point.size() != num_vars()) {
    throw std::invalid_argument("VoltageLayout::to_phasors: wrong point dimension");
  }
  std::vector<Complex> out;
  for (int k = 1; k <= num_buses_; ++k) {
    const auto q = vq(k);
    out.emplace_back(point[vd(k)], q ? point[*q] : 0.0);
  }
  return out;
}

std::vector<const Polynomial*> OpfPolynomials::all() const {
  std::vector<const Polynomial*> out;
  for (const auto* group : {&voltage_sq, &active, &reactive, &cost}) {
    for (const auto& p : *group) out.push_back(&p);
  }
  for (const auto& f : flows) {
    out.insert(out.end(), {&f.p_from, &f.q_from, &f.p_to, &f.q_to});
  }
  return out;
}

namespace {

class Builder {
 public:
  explicit Builder(const VoltageLayout& layout) : layout_(layout) {}

  Polynomial zero() const { return Polynomial(layout_.num_vars()); }

  Polynomial vd(int bus) const { return Polynomial::variable(layout_.num_vars(), layout_.vd(bus)); }

  Polynomial vq(int bus) const {
    const auto q = layout_.vq(bus);
    return q ? Polynomial::variable(layout_.num_vars(), *q) : zero();
  }

 private:
  const VoltageLayout& layout_;
};

}  // namespace

OpfPolynomials build_opf_polynomials(const NetworkCase& network) {
  const ComplexMatrix y = admittance_matrix(network);
  const int n = network.num_buses();

  OpfPolynomials out;
  out.layout = VoltageLayout(n, network.reference_bus());
  const Builder v(out.layout);

  for (int k = 1; k <= n; ++k) {
    out.voltage_sq.push_back(v.vd(k) * v.vd(k) + v.vq(k) * v.vq(k));

    Polynomial re_sum = v.zero();  // sum_i G_ki V_di - B_ki V_qi
    Polynomial im_sum = v.zero();  // sum_i B_ki V_di + G_ki V_qi
    for (int i = 1; i <= n; ++i) {
      const Complex yki = y(k - 1, i - 1);
      if (yki == 0.0) continue;
      re_sum += yki.real() * v.vd(i) - yki.imag() * v.vq(i);
      im_sum += yki.imag() * v.vd(i) + yki.real() * v.vq(i);
    }
    const Bus& bus = network.bus(k);
    out.active.push_back(v.vd(k) * re_sum + v.vq(k) * im_sum + bus.load_p);
    out.reactive.push_back(v.vq(k) * re_sum - v.vd(k) * im_sum + bus.load_q);
  }

  for (int k = 1; k <= n; ++k) {
    Polynomial cost = v.zero();
    if (const auto* g = network.generator_at(k)) {
      const Polynomial& p = out.active[static_cast<std::size_t>(k - 1)];
      cost = g->cost_c2 * (p * p) + g->cost_c1 * p + g->cost_c0;
    }
    out.cost.push_back(std::move(cost));
  }

  for (const Branch& br : network.branches) {
    const int l = br.from;
    const int m = br.to;
    const Complex ys = br.series_admittance();
    const double g = ys.real();
    const double b = ys.imag();
    const double s = std::sin(br.shift);
    const double c = std::cos(br.shift);
    const double t = br.tau;

    const Polynomial vl_sq = v.vd(l) * v.vd(l) + v.vq(l) * v.vq(l);
    const Polynomial vm_sq = v.vd(m) * v.vd(m) + v.vq(m) * v.vq(m);
    const Polynomial cos_part = v.vd(l) * v.vd(m) + v.vq(l) * v.vq(m);
    const Polynomial sin_part = v.vd(l) * v.vq(m) - v.vq(l) * v.vd(m);

    BranchFlowPolynomials f;
    f.p_from = vl_sq * (g / (t * t)) + cos_part * ((b * s - g * c) / t) + sin_part * ((g * s + b * c) / t);
    f.q_from = vl_sq * (-(b + br.b_sh / 2.0) / (t * t)) + cos_part * ((b * c + g * s) / t) +
               sin_part * ((g * c - b * s) / t);
    f.p_to = vm_sq * g - cos_part * ((g * c + b * s) / t) + sin_part * ((g * s - b * c) / t);
    f.q_to = vm_sq * (-(b + br.b_sh / 2.0)) + cos_part * ((b * c - g * s) / t) -
             sin_part * ((g * c + b * s) / t);
    out.flows.push_back(std::move(f));
  }
  return out;
}

}  // namespace opfrelax
