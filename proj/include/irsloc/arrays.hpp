#pragma once

#include <Eigen/Core>

#include "irsloc/common.hpp"

namespace irsloc {

/// Half-wavelength ULA response with centered element indices
/// k = i - (n-1)/2. Order r returns the r-th derivative with respect to mu,
/// i.e. entries (j pi k)^r exp(j pi k mu). Throws DomainError if |mu| > 1.
Eigen::VectorXcd ula_steering(int n, double mu, int order = 0);

struct SteeringInnerProducts {
  double b_h_b = 0.0;
  Complex b_h_bdot{};
  double b_h_bddot = 0.0;
};

/// b^H b, b^H b_dot and b^H b_ddot evaluated from the steering vectors.
SteeringInnerProducts steering_inner_products(int n, double mu);

/// -pi^2 n (n^2 - 1) / 12, the value b^H b_ddot takes for every mu.
double second_derivative_inner_product(int n);

}  // namespace irsloc
