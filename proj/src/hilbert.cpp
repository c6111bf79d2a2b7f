#include "entsim/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace entsim {

SpaceLayout::SpaceLayout(int fock_cutoff) : cutoff_(fock_cutoff) {
  if (fock_cutoff < 1 || fock_cutoff > kMaxCutoff) {
    throw std::invalid_argument("fock_cutoff must lie in [1, " + std::to_string(kMaxCutoff) +
                                "], got " + std::to_string(fock_cutoff));
  }
}

Operator annihilation(int fock_cutoff) {
  if (fock_cutoff < 1) {
    throw std::invalid_argument("annihilation: fock_cutoff must be >= 1, got " +
                                std::to_string(fock_cutoff));
  }
  const int m = fock_cutoff + 1;
  Operator a = Operator::Zero(m, m);
  for (int n = 1; n < m; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Operator creation(int fock_cutoff) { return annihilation(fock_cutoff).adjoint(); }

Operator number_operator(int fock_cutoff) {
  const Operator a = annihilation(fock_cutoff);
  return a.adjoint() * a;
}

Operator sigma_minus() {
  Operator s = Operator::Zero(2, 2);
  s(kGround, kExcited) = 1.0;
  return s;
}

Operator sigma_plus() { return sigma_minus().adjoint(); }

Operator sigma_ee() {
  Operator s = Operator::Zero(2, 2);
  s(kExcited, kExcited) = 1.0;
  return s;
}

Operator embed(const Operator& op, Subsystem slot, const SpaceLayout& layout) {
  const auto dims = layout.subsystem_dims();
  const int k = static_cast<int>(slot);
  if (op.rows() != dims[k] || op.cols() != dims[k]) {
    throw std::invalid_argument("embed: operator is " + std::to_string(op.rows()) + "x" +
                                std::to_string(op.cols()) + " but slot " + std::to_string(k) +
                                " has dimension " + std::to_string(dims[k]));
  }
  Operator out = Operator::Identity(1, 1);
  for (int i = 0; i < 3; ++i) {
    const Operator factor = (i == k) ? op : Operator::Identity(dims[i], dims[i]);
    out = Eigen::kroneckerProduct(out, factor).eval();
  }
  return out;
}

NamedState parse_named_state(std::string_view name) {
  if (name == "G0") return NamedState::G0;
  if (name == "E") return NamedState::E;
  if (name == "PsiPlus") return NamedState::PsiPlus;
  if (name == "PsiMinus") return NamedState::PsiMinus;
  throw std::invalid_argument("unknown named state '" + std::string(name) +
                              "' (expected G0, E, PsiPlus or PsiMinus)");
}

std::string_view to_string(NamedState s) {
  switch (s) {
    case NamedState::G0: return "G0";
    case NamedState::E: return "E";
    case NamedState::PsiPlus: return "PsiPlus";
    case NamedState::PsiMinus: return "PsiMinus";
  }
  return "?";
}

StateVector named_state(NamedState which, const SpaceLayout& layout) {
  StateVector psi = StateVector::Zero(layout.dim());
  const double r = 1.0 / std::sqrt(2.0);
  switch (which) {
    case NamedState::G0:
      psi(layout.index(kGround, kGround, 0)) = 1.0;
      break;
    case NamedState::E:
      psi(layout.index(kGround, kGround, 1)) = 1.0;
      break;
    case NamedState::PsiPlus:
      psi(layout.index(kExcited, kGround, 0)) = r;
      psi(layout.index(kGround, kExcited, 0)) = r;
      break;
    case NamedState::PsiMinus:
      psi(layout.index(kExcited, kGround, 0)) = r;
      psi(layout.index(kGround, kExcited, 0)) = -r;
      break;
  }
  return psi;
}

StateVector phi_plus() {
  const double r = 1.0 / std::sqrt(2.0);
  StateVector v = StateVector::Zero(4);
  v(1) = r;
  v(2) = r;
  return v;
}

StateVector phi_minus() {
  const double r = 1.0 / std::sqrt(2.0);
  StateVector v = StateVector::Zero(4);
  v(1) = r;
  v(2) = -r;
  return v;
}

Physicality physicality(const Operator& rho) {
  Physicality p;
  p.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  p.trace_error = std::abs(rho.trace() - cplx(1.0, 0.0));
  const Operator herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> es(herm, Eigen::EigenvaluesOnly);
  p.min_eigenvalue = es.eigenvalues().minCoeff();
  return p;
}

bool is_physical(const Physicality& p, const StateTolerances& tol) {
  return p.hermiticity_error <= tol.hermiticity && p.trace_error <= tol.trace &&
         p.min_eigenvalue >= -tol.positivity;
}

Physicality worst(const Physicality& a, const Physicality& b) {
  return {std::max(a.hermiticity_error, b.hermiticity_error), std::max(a.trace_error, b.trace_error),
          std::min(a.min_eigenvalue, b.min_eigenvalue)};
}

std::string describe(const Physicality& p) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "hermiticity %.1e, trace error %.1e, min eigenvalue %.2e", p.hermiticity_error,
                p.trace_error, p.min_eigenvalue);
  return buf;
}

DensityMatrix::DensityMatrix(Operator rho, const StateTolerances& tol) : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols() || rho_.rows() == 0) {
    throw std::invalid_argument("density matrix must be square and non-empty");
  }
  const Physicality p = entsim::physicality(rho_);
  if (p.hermiticity_error > tol.hermiticity) {
    throw std::invalid_argument("density matrix is not Hermitian (max |rho - rho^dagger| = " +
                                std::to_string(p.hermiticity_error) + ")");
  }
  if (p.trace_error > tol.trace) {
    throw std::invalid_argument("density matrix trace deviates from 1 by " +
                                std::to_string(p.trace_error));
  }
  if (p.min_eigenvalue < -tol.positivity) {
    throw std::invalid_argument("density matrix has negative eigenvalue " +
                                std::to_string(p.min_eigenvalue));
  }
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  const double norm = psi.norm();
  if (std::abs(norm - 1.0) > 1e-12) {
    throw std::invalid_argument("pure state is not normalized (norm = " + std::to_string(norm) +
                                ")");
  }
  return DensityMatrix(psi * psi.adjoint(), Unchecked{});
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  return DensityMatrix(Operator::Identity(dim, dim) / static_cast<double>(dim), Unchecked{});
}

DensityMatrix DensityMatrix::unchecked(Operator rho) { return DensityMatrix(std::move(rho), Unchecked{}); }

Operator partial_trace_mode(const Operator& rho, const SpaceLayout& layout) {
  const int d = layout.dim();
  if (rho.rows() != d || rho.cols() != d) {
    throw std::invalid_argument("partial_trace_mode: expected " + std::to_string(d) + "x" +
                                std::to_string(d) + " input, got " + std::to_string(rho.rows()) +
                                "x" + std::to_string(rho.cols()));
  }
  const int m = layout.mode_dim();
  Operator out = Operator::Zero(4, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      out(i, j) = rho.block(i * m, j * m, m, m).trace();
    }
  }
  return out;
}

DensityMatrix partial_trace_mode(const DensityMatrix& rho, const SpaceLayout& layout) {
  return DensityMatrix::unchecked(partial_trace_mode(rho.matrix(), layout));
}

double trace_distance(const Operator& a, const Operator& b) {
  const Operator diff = a - b;
  const Operator herm = 0.5 * (diff + diff.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> es(herm, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace entsim
