#pragma once

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "entsim/hilbert.hpp"

namespace entsim::test {

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240517);
  return gen;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline Operator random_complex(int rows, int cols) {
  std::normal_distribution<double> n;
  Operator m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = cplx(n(rng()), n(rng()));
  return m;
}

inline Operator random_hermitian(int d) {
  const Operator a = random_complex(d, d);
  return 0.5 * (a + a.adjoint());
}

// A A^dag / tr, full rank with probability one.
inline Operator random_density(int d) {
  const Operator a = random_complex(d, d);
  Operator rho = a * a.adjoint();
  return rho / rho.trace();
}

inline Operator random_unitary(int d) {
  Eigen::HouseholderQR<Operator> qr(random_complex(d, d));
  return qr.householderQ();
}

inline double max_abs(const Operator& m) { return m.cwiseAbs().maxCoeff(); }

inline Operator projector(const StateVector& v) { return v * v.adjoint(); }

}  // namespace entsim::test
