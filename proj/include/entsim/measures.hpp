#pragma once

#include <stdexcept>
#include <string>

#include "entsim/hilbert.hpp"

namespace entsim {

/// Raised when a measure's numerical preconditions fail.
class MeasureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tolerances applied to states sampled from time integration.
inline constexpr StateTolerances kSampleTolerances{1e-8, 1e-6, 1e-8};

/// Wootters concurrence of a 4x4 two-qubit state in the (ee, eg, ge, gg) basis.
///
/// Uses the eigenvalues of rho * (sy sy) rho^* (sy sy). Real parts above
/// -1e-10 are clipped at zero; imaginary parts beyond 1e-8 raise MeasureError.
double concurrence(const Operator& rho, const StateTolerances& tol = kSampleTolerances);
double concurrence(const DensityMatrix& rho, const StateTolerances& tol = kSampleTolerances);

/// Concurrence of the qubit pair after tracing out the mode.
double concurrence_of_full(const Operator& rho, const SpaceLayout& layout,
                           const StateTolerances& tol = kSampleTolerances);

/// sigma_y (x) sigma_y in the (ee, eg, ge, gg) basis.
Eigen::Matrix4cd spin_flip();

/// Zero-energy eigenvector of the single-excitation Hamiltonian,
/// c_E |E> + c_psi_minus |Psi->.
struct DarkState {
  double c_e = 0.0;
  double c_psi_minus = 0.0;

  /// Coefficients on the reduced basis (|E>, |Psi+>, |Psi->).
  Eigen::Vector3cd reduced() const;
  StateVector full(const SpaceLayout& layout) const;
};

/// Throws std::invalid_argument when g == delta == 0.
DarkState dark_state(double g, double delta);

struct Populations {
  double g0 = 0.0;
  double e = 0.0;
  double psi_plus = 0.0;
  double psi_minus = 0.0;
  double n_mode = 0.0;
};

Populations populations(const Operator& rho, const SpaceLayout& layout);

/// <psi| rho |psi>
double fidelity_pure(const Operator& rho, const StateVector& psi);
double purity(const Operator& rho);
double mean_photon_number(const Operator& rho, const SpaceLayout& layout);

}  // namespace entsim
