#include "entsim/measures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

#include <Eigen/Eigenvalues>

namespace entsim {

namespace {

constexpr double kClipNegative = 1e-10;
constexpr double kMaxImaginary = 1e-8;

void require_dim(const Operator& rho, Eigen::Index dim, const char* what) {
  if (rho.rows() != dim || rho.cols() != dim) {
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(dim) + "x" +
                                std::to_string(dim) + " matrix, got " +
                                std::to_string(rho.rows()) + "x" + std::to_string(rho.cols()));
  }
}

}  // namespace

Eigen::Matrix4cd spin_flip() {
  Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  return yy;
}

double concurrence(const Operator& rho, const StateTolerances& tol) {
  require_dim(rho, 4, "concurrence");
  const Physicality p = physicality(rho);
  if (!is_physical(p, tol)) {
    throw std::invalid_argument("concurrence: input is not a valid density matrix (" + describe(p) + ")");
  }
  const Eigen::Matrix4cd r = rho;
  const Eigen::Matrix4cd yy = spin_flip();
  const Eigen::Matrix4cd product = r * yy * r.conjugate() * yy;

  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(product, false);
  if (es.info() != Eigen::Success) throw MeasureError("concurrence: eigensolver did not converge");

  std::array<double, 4> roots{};
  for (int i = 0; i < 4; ++i) {
    const cplx ev = es.eigenvalues()(i);
    if (std::abs(ev.imag()) > kMaxImaginary) {
      throw MeasureError("concurrence: eigenvalue has imaginary part " +
                         std::to_string(ev.imag()));
    }
    if (ev.real() < -kClipNegative) {
      throw MeasureError("concurrence: eigenvalue has negative real part " +
                         std::to_string(ev.real()));
    }
    roots[i] = std::sqrt(std::max(ev.real(), 0.0));
  }
  std::sort(roots.begin(), roots.end(), std::greater<>());
  return std::max(0.0, roots[0] - roots[1] - roots[2] - roots[3]);
}

double concurrence(const DensityMatrix& rho, const StateTolerances& tol) {
  return concurrence(rho.matrix(), tol);
}

double concurrence_of_full(const Operator& rho, const SpaceLayout& layout,
                           const StateTolerances& tol) {
  return concurrence(partial_trace_mode(rho, layout), tol);
}

Eigen::Vector3cd DarkState::reduced() const { return {c_e, 0.0, c_psi_minus}; }

StateVector DarkState::full(const SpaceLayout& layout) const {
  return c_e * named_state(NamedState::E, layout) +
         c_psi_minus * named_state(NamedState::PsiMinus, layout);
}

DarkState dark_state(double g, double delta) {
  if (g == 0.0 && delta == 0.0) {
    throw std::invalid_argument("dark_state: undefined for g = delta = 0");
  }
  const double norm = std::sqrt(delta * delta + 2.0 * g * g);
  return {-delta / norm, std::sqrt(2.0) * g / norm};
}

Populations populations(const Operator& rho, const SpaceLayout& layout) {
  require_dim(rho, layout.dim(), "populations");
  Populations p;
  p.g0 = fidelity_pure(rho, named_state(NamedState::G0, layout));
  p.e = fidelity_pure(rho, named_state(NamedState::E, layout));
  p.psi_plus = fidelity_pure(rho, named_state(NamedState::PsiPlus, layout));
  p.psi_minus = fidelity_pure(rho, named_state(NamedState::PsiMinus, layout));
  p.n_mode = mean_photon_number(rho, layout);
  return p;
}

double fidelity_pure(const Operator& rho, const StateVector& psi) {
  require_dim(rho, psi.size(), "fidelity_pure");
  return psi.dot(rho * psi).real();
}

double purity(const Operator& rho) { return (rho * rho).trace().real(); }

double mean_photon_number(const Operator& rho, const SpaceLayout& layout) {
  require_dim(rho, layout.dim(), "mean_photon_number");
  const int m = layout.mode_dim();
  double n = 0.0;
  for (int block = 0; block < 4; ++block) {
    for (int k = 0; k < m; ++k) n += k * rho(block * m + k, block * m + k).real();
  }
  return n;
}

}  // namespace entsim
