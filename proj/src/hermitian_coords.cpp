#include "hermitian_coords.hpp"

#include <stdexcept>

namespace entsim::detail {

Eigen::VectorXd to_coords(const Operator& rho) {
  const Eigen::Index d = rho.rows();
  Eigen::VectorXd x(d * d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      if (i == j) {
        x(i + j * d) = rho(i, i).real();
      } else if (i < j) {
        x(i + j * d) = rho(i, j).real();
      } else {
        x(i + j * d) = rho(j, i).imag();
      }
    }
  }
  return x;
}

Operator from_coords(const Eigen::VectorXd& x, int dim) {
  if (x.size() != static_cast<Eigen::Index>(dim) * dim) {
    throw std::invalid_argument("from_coords: length mismatch");
  }
  Operator rho(dim, dim);
  for (int j = 0; j < dim; ++j) {
    rho(j, j) = x(j + j * dim);
    for (int i = 0; i < j; ++i) {
      const cplx v(x(i + j * dim), x(j + i * dim));
      rho(i, j) = v;
      rho(j, i) = std::conj(v);
    }
  }
  return rho;
}

Eigen::MatrixXd real_representation(const Superoperator& l) {
  const int d = l.hilbert_dim();
  const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  if (l.matrix.rows() != n || l.matrix.cols() != n) {
    throw std::invalid_argument("real_representation: superoperator is not D^2 x D^2");
  }
  const cplx i_unit(0.0, 1.0);
  Eigen::MatrixXd m(n, n);
  Eigen::VectorXcd col(n);
  for (int b = 0; b < d; ++b) {
    for (int a = 0; a < d; ++a) {
      const Eigen::Index p = a + static_cast<Eigen::Index>(b) * d;
      const Eigen::Index pt = b + static_cast<Eigen::Index>(a) * d;
      // Image of the basis matrix attached to coordinate p.
      if (a == b) {
        col = l.matrix.col(p);
      } else if (a < b) {
        col = l.matrix.col(p) + l.matrix.col(pt);
      } else {
        // coordinate p = (a, b) with a > b carries Im rho_ba: i E_ba - i E_ab.
        col = i_unit * l.matrix.col(pt) - i_unit * l.matrix.col(p);
      }
      for (int jj = 0; jj < d; ++jj) {
        for (int ii = 0; ii < d; ++ii) {
          const Eigen::Index q = ii + static_cast<Eigen::Index>(jj) * d;
          m(q, p) = (ii <= jj) ? col(q).real() : col(jj + static_cast<Eigen::Index>(ii) * d).imag();
        }
      }
    }
  }
  return m;
}

}  // namespace entsim::detail
