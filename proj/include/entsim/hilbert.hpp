#pragma once

#include <array>
#include <complex>
#include <string>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

namespace entsim {

using cplx = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

/// Composite space qubit1 (x) qubit2 (x) Fock mode truncated at `fock_cutoff`.
///
/// Qubit local basis is (|e>, |g>), so the two-qubit block is ordered
/// (ee, eg, ge, gg). Basis element (q1, q2, n) sits at
/// q1 * 2 * (N+1) + q2 * (N+1) + n.
class SpaceLayout {
 public:
  static constexpr int kMaxCutoff = 8;

  explicit SpaceLayout(int fock_cutoff);

  int fock_cutoff() const { return cutoff_; }
  int mode_dim() const { return cutoff_ + 1; }
  int dim() const { return 4 * mode_dim(); }
  std::array<int, 3> subsystem_dims() const { return {2, 2, mode_dim()}; }

  int index(int q1, int q2, int n) const { return (q1 * 2 + q2) * mode_dim() + n; }

  bool operator==(const SpaceLayout&) const = default;

 private:
  int cutoff_;
};

enum class Subsystem { qubit1 = 0, qubit2 = 1, mode = 2 };

/// Local qubit level indices.
inline constexpr int kExcited = 0;
inline constexpr int kGround = 1;

Operator annihilation(int fock_cutoff);
Operator creation(int fock_cutoff);
Operator number_operator(int fock_cutoff);

Operator sigma_minus();  // |g><e|
Operator sigma_plus();   // |e><g|
Operator sigma_ee();     // |e><e|

/// identity (x) ... (x) op (x) ... (x) identity, op placed at `slot`.
Operator embed(const Operator& op, Subsystem slot, const SpaceLayout& layout);

enum class NamedState { G0, E, PsiPlus, PsiMinus };

NamedState parse_named_state(std::string_view name);
std::string_view to_string(NamedState s);

/// |G0> = |g,g>|0>, |E> = |g,g>|1>, |Psi+-> = (|e,g> +- |g,e>)/sqrt2 (x) |0>.
StateVector named_state(NamedState which, const SpaceLayout& layout);

/// Two-qubit Bell-type states in the (ee, eg, ge, gg) basis.
StateVector phi_plus();
StateVector phi_minus();

struct Physicality {
  double hermiticity_error = 0.0;  // max |rho - rho^dagger|
  double trace_error = 0.0;        // |tr rho - 1|
  double min_eigenvalue = 0.0;
};

struct StateTolerances {
  double hermiticity = 1e-10;
  double trace = 1e-8;
  double positivity = 1e-8;
};

Physicality physicality(const Operator& rho);
/// Element-wise worst of two reports (largest errors, smallest eigenvalue).
Physicality worst(const Physicality& a, const Physicality& b);
bool is_physical(const Physicality& p, const StateTolerances& tol = {});
/// "hermiticity 1.2e-09, trace error 3.0e-12, min eigenvalue -4.1e-08"
std::string describe(const Physicality& p);

/// Hermitian, unit-trace, positive semidefinite operator.
class DensityMatrix {
 public:
  /// Throws std::invalid_argument when `rho` violates `tol`.
  explicit DensityMatrix(Operator rho, const StateTolerances& tol = {});

  static DensityMatrix pure(const StateVector& psi);
  static DensityMatrix maximally_mixed(int dim);
  /// Skips validation; for states already certified by the caller.
  static DensityMatrix unchecked(Operator rho);

  const Operator& matrix() const { return rho_; }
  int dim() const { return static_cast<int>(rho_.rows()); }
  Physicality physicality() const { return entsim::physicality(rho_); }

 private:
  struct Unchecked {};
  DensityMatrix(Operator rho, Unchecked) : rho_(std::move(rho)) {}

  Operator rho_;
};

/// Traces out the mode. Input must be D x D for `layout`; output is 4 x 4.
Operator partial_trace_mode(const Operator& rho, const SpaceLayout& layout);
DensityMatrix partial_trace_mode(const DensityMatrix& rho, const SpaceLayout& layout);

/// Trace distance (1/2) ||a - b||_1 for Hermitian arguments.
double trace_distance(const Operator& a, const Operator& b);

}  // namespace entsim
