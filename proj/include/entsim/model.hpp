#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "entsim/hilbert.hpp"

namespace entsim {

/// Which qubit carries +delta in the rotating-frame Hamiltonian.
///
/// `printed` puts +delta on qubit 1 and -delta on qubit 2. `lab_consistent`
/// flips the sign so that it matches omega_e1 = omega_m - delta. The two
/// differ by relabelling the qubits.
enum class DetuningSign { printed, lab_consistent };

DetuningSign parse_detuning_sign(std::string_view s);
std::string_view to_string(DetuningSign s);

/// Physical parameters. All rates are in units of kappa, times in 1/kappa.
///
/// Decay rates follow the convention rate * (2 L rho L^dag - L^dag L rho - rho L^dag L),
/// so gamma and kappa are half of the rates used with the
/// L rho L^dag - {L^dag L, rho}/2 form.
struct SystemParams {
  double g = 1.0;
  double delta = 0.1;
  double gamma = 1e-5;
  double kappa = 1.0;
  double epsilon = 1.0;
  int fock_cutoff = 8;
  double omega_m = 0.0;  // lab frame only
  DetuningSign sign = DetuningSign::printed;

  double omega_e1() const { return omega_m - delta; }
  double omega_e2() const { return omega_m + delta; }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  bool operator==(const SystemParams&) const = default;
};

/// Time-dependent scalar profile.
class Schedule {
 public:
  enum class Kind { constant, tanh_down, tanh_up };

  Schedule() = default;
  static Schedule constant(double value);
  /// (max/2) [1 - tanh(lambda (t - t0))]
  static Schedule tanh_down(double max_value, double t0, double lambda);
  /// (max/2) [1 + tanh(lambda (t - t0))]
  static Schedule tanh_up(double max_value, double t0, double lambda);

  double operator()(double t) const;

  Kind kind() const { return kind_; }
  double max_value() const { return value_; }
  double t0() const { return t0_; }
  double lambda() const { return lambda_; }

  bool operator==(const Schedule&) const = default;

 private:
  Kind kind_ = Kind::constant;
  double value_ = 0.0;
  double t0_ = 0.0;
  double lambda_ = 0.0;
};

Schedule::Kind parse_schedule_kind(std::string_view s);
std::string_view to_string(Schedule::Kind k);

// Hamiltonian pieces on the full layout.

/// sigma_ee1 - sigma_ee2 (printed) or its negative (lab_consistent).
Operator detuning_operator(const SpaceLayout& layout, DetuningSign sign = DetuningSign::printed);
/// a (sigma_+1 + sigma_+2) + h.c.
Operator coupling_operator(const SpaceLayout& layout);
/// a + a^dag
Operator pump_operator(const SpaceLayout& layout);
/// sigma_ee1 + sigma_ee2 + a^dag a
Operator excitation_number(const SpaceLayout& layout);

Operator hamiltonian_lab(const SystemParams& p, const SpaceLayout& layout);
Operator hamiltonian_rot(const SystemParams& p, const SpaceLayout& layout);
Operator hamiltonian_pump(double epsilon, const SpaceLayout& layout);

/// Single-excitation Hamiltonian on the ordered basis (|E>, |Psi+>, |Psi->).
Operator hamiltonian_reduced(double g, double delta);

struct Dissipator {
  Operator jump;
  double rate = 0.0;
};

/// (sigma_-1, gamma), (sigma_-2, gamma), (a, kappa).
std::vector<Dissipator> dissipators(const SystemParams& p, const SpaceLayout& layout);

/// rate * (2 L rho L^dag - L^dag L rho - rho L^dag L)
Operator apply_dissipator(const Dissipator& d, const Operator& rho);

/// -i[H, rho] + sum of dissipator terms, evaluated with matrix products.
Operator lindblad_rhs(const Operator& hamiltonian, std::span<const Dissipator> ds,
                      const Operator& rho);

/// Matrix acting on column-stacked density matrices: L vec(rho) = vec(drho/dt).
struct Superoperator {
  Eigen::MatrixXcd matrix;

  int hilbert_dim() const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const { return matrix * v; }
};

Superoperator liouvillian(const Operator& hamiltonian, std::span<const Dissipator> ds);

/// Liouvillian for the stationary driven model: hamiltonian_rot + hamiltonian_pump.
Superoperator steady_liouvillian(const SystemParams& p);

Eigen::VectorXcd vec(const Operator& m);
Operator unvec(const Eigen::VectorXcd& v, int dim);

}  // namespace entsim
