#pragma once

#include <Eigen/Dense>

#include "entsim/model.hpp"

namespace entsim::detail {

// Real coordinates of a Hermitian D x D matrix, indexed like its column-stacked
// vec: position (i, j) holds rho_ii for i == j, Re rho_ij for i < j and
// Im rho_ji for i > j.

Eigen::VectorXd to_coords(const Operator& rho);
Operator from_coords(const Eigen::VectorXd& x, int dim);

/// Real matrix M with to_coords(L(rho)) = M to_coords(rho) for Hermitian rho.
Eigen::MatrixXd real_representation(const Superoperator& l);

}  // namespace entsim::detail
