#include "irsloc/arrays.hpp"

#include <cmath>
#include <string>

namespace irsloc {

Eigen::VectorXcd ula_steering(int n, double mu, int order) {
  if (n < 1) throw DimensionError("array size must be >= 1");
  if (!(std::abs(mu) <= 1.0)) throw DomainError("direction cosine " + std::to_string(mu) + " outside [-1, 1]");
  if (order < 0 || order > 2) throw DomainError("steering derivative order must be 0, 1 or 2");
  Eigen::VectorXcd b(n);
  const double center = 0.5 * (n - 1);
  for (int i = 0; i < n; ++i) {
    const double k = i - center;
    Complex v = std::polar(1.0, kPi * k * mu);
    if (order >= 1) v *= kJ * kPi * k;
    if (order == 2) v *= kJ * kPi * k;
    b[i] = v;
  }
  return b;
}

SteeringInnerProducts steering_inner_products(int n, double mu) {
  const Eigen::VectorXcd b = ula_steering(n, mu, 0);
  SteeringInnerProducts p;
  p.b_h_b = b.squaredNorm();
  p.b_h_bdot = b.dot(ula_steering(n, mu, 1));
  p.b_h_bddot = b.dot(ula_steering(n, mu, 2)).real();
  return p;
}

double second_derivative_inner_product(int n) {
  const double nn = n;
  return -kPi * kPi * nn * (nn * nn - 1.0) / 12.0;
}

}  // namespace irsloc
