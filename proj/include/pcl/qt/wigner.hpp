#pragma once

#include <Eigen/Dense>
#include <span>

#include "pcl/qt/fock_state.hpp"

namespace pcl {

// Wigner function W(x, p) of a pure Fock-basis state, with a = (x + i p)/sqrt(2).
// Rows follow p_values, columns follow x_values.
Eigen::MatrixXd wigner_grid(const FockVector& psi, std::span<const double> x_values, std::span<const double> p_values);

}  // namespace pcl
