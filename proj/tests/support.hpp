#pragma once

#include <complex>
#include <random>
#include <vector>

#include "opfrelax/cases.hpp"
#include "opfrelax/hierarchy.hpp"
#include "opfrelax/recover.hpp"

namespace table_one {

// Published solution, rounded to three decimals.
inline const std::complex<double> kV2{1.049, -0.767};
inline const std::complex<double> kV3{0.849, -0.586};
inline constexpr double kObjective = 5.68;
inline constexpr double kQ1 = -7.77;
inline constexpr double kQ2 = 12.52;
inline constexpr double kTol = 2e-2;

inline std::vector<opfrelax::Complex> two_bus() { return {1.0, kV2}; }
inline std::vector<opfrelax::Complex> three_bus() { return {1.0, kV2, kV3}; }

}  // namespace table_one

namespace testing {

inline bool near(std::complex<double> a, std::complex<double> b, double tol) {
  return std::abs(a.real() - b.real()) <= tol && std::abs(a.imag() - b.imag()) <= tol;
}

inline double max_deviation(const std::vector<opfrelax::Complex>& a, const std::vector<opfrelax::Complex>& b) {
  double out = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    out = std::max({out, std::abs(a[k].real() - b[k].real()), std::abs(a[k].imag() - b[k].imag())});
  }
  return out;
}

/// Bundled case with the bus-2 voltage setpoint replaced.
inline opfrelax::NetworkCase with_v2(const std::string& name, double v2) {
  opfrelax::NetworkCase c = opfrelax::builtin_case(name);
  c.buses[1].v_min = v2;
  c.buses[1].v_max = v2;
  return c;
}

/// Power-flow solution from a flat start, the independent feasible point used as oracle.
inline std::vector<opfrelax::Complex> oracle(const opfrelax::NetworkCase& c) {
  const auto r = opfrelax::newton_power_flow(c, opfrelax::flat_start(c));
  if (!r.converged) throw std::runtime_error("oracle did not converge: " + r.message);
  return r.voltages;
}

inline opfrelax::Polynomial random_polynomial(std::mt19937& rng, std::size_t num_vars, int max_degree, int terms) {
  std::uniform_int_distribution<int> power(0, max_degree);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  opfrelax::Polynomial p(num_vars);
  for (int t = 0; t < terms; ++t) {
    opfrelax::Exponent e(num_vars);
    int budget = max_degree;
    for (std::size_t i = 0; i < num_vars && budget > 0; ++i) {
      const int k = std::min(budget, power(rng) / 2);
      e.set(i, k);
      budget -= k;
    }
    p.add_term(e, coef(rng));
  }
  return p;
}

inline std::vector<double> random_point(std::mt19937& rng, std::size_t n, double scale = 1.5) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

}  // namespace testing
