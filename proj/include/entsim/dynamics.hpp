#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "entsim/hilbert.hpp"
#include "entsim/model.hpp"

namespace entsim {

/// Step-size underflow or step budget exhaustion during time integration.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time)
      : std::runtime_error(what + " at t = " + std::to_string(time)), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Singular steady-state system or unphysical solution.
class SteadyStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IntegratorConfig {
  double rtol = 1e-8;
  double atol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0.0;  // 0 picks one from the initial derivative
  long max_steps = 100'000'000;

  void validate() const;
  bool operator==(const IntegratorConfig&) const = default;
};

struct TimeSpan {
  double start = 0.0;
  double end = 0.0;
};

/// Time-dependent Hamiltonian piece: coefficient(t) * op.
struct HamiltonianTerm {
  Operator op;
  Schedule coefficient;
};

/// Right-hand side of the master equation, drho/dt = G(t)[rho].
class Generator {
 public:
  using Fn = std::function<void(double t, const Operator& rho, Operator& out)>;

  Generator(int dim, Fn fn) : dim_(dim), fn_(std::move(fn)) {}

  static Generator constant(const Superoperator& l);
  static Generator from_superoperator(int dim, std::function<Superoperator(double)> l);
  /// Evaluates -i[H(t), rho] + dissipators with products against the nonzero
  /// pattern of each operator; H(t) = sum_k coefficient_k(t) op_k.
  static Generator lindblad(std::vector<HamiltonianTerm> terms, std::vector<Dissipator> ds);

  void operator()(double t, const Operator& rho, Operator& out) const { fn_(t, rho, out); }
  int dim() const { return dim_; }

 private:
  int dim_;
  Fn fn_;
};

struct Observable {
  std::string name;
  std::function<double(const Operator&)> fn;
};

struct IntegrationStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evaluations = 0;
  /// Worst sampled state, before symmetrization.
  Physicality worst_sample{0.0, 0.0, std::numeric_limits<double>::infinity()};
};

/// Samples of a time evolution. Observable columns align with `times`.
struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::vector<std::string> observable_names;
  std::vector<std::vector<double>> observables;
  IntegrationStats stats;

  const std::vector<double>& column(std::string_view name) const;
};

/// Adaptive Dormand-Prince 5(4) integration of drho/dt = G(t)[rho].
///
/// Steps land exactly on each sample time; sampled states are re-symmetrized
/// to (rho + rho^dag)/2 and checked against kSampleTolerances.
Trajectory evolve(const DensityMatrix& rho0, const Generator& generator, TimeSpan span,
                  std::span<const double> sample_times, const IntegratorConfig& cfg = {},
                  std::span<const Observable> observables = {});

/// Exact propagation under a constant Liouvillian on the grid t = m * base_step.
///
/// exp(base_step L) comes from a Pade approximant over real Hermitian
/// coordinates; exp(2^j base_step L) are its repeated squares, built on demand.
/// Advancing by m steps costs one matrix-vector product per set bit of m.
class GridPropagator {
 public:
  GridPropagator(const Superoperator& l, double base_step);

  /// exp(steps * base_step * L) applied to a Hermitian rho.
  Operator apply(const Operator& rho, std::uint64_t steps);
  double base_step() const { return h_; }
  int dim() const { return dim_; }
  /// Number of squared powers built so far.
  int powers() const { return static_cast<int>(powers_.size()); }

 private:
  int dim_;
  double h_;
  std::vector<Eigen::MatrixXd> powers_;
};

struct SteadyState {
  DensityMatrix rho;
  double residual = 0.0;  // ||L vec(rho)||_inf
  double min_eigenvalue = 0.0;
  double rcond = 0.0;     // reciprocal condition estimate of the constrained system
};

/// Solves L vec(rho) = 0 with the first diagonal equation replaced by tr rho = 1.
///
/// The system is assembled over real Hermitian coordinates (diagonal entries,
/// real and imaginary parts of the upper triangle), which is the same linear
/// system restricted to Hermitian rho. Throws SteadyStateError when the system
/// is singular or the solution has an eigenvalue below -1e-8.
SteadyState solve_steady_state(const Superoperator& l);
DensityMatrix steady_state(const Superoperator& l, const SpaceLayout& layout);

using StateObservable = std::function<double(const DensityMatrix&, const SpaceLayout&)>;

struct CutoffConvergence {
  int cutoff = 0;
  double value = 0.0;  // observable at cutoff + 1
  std::vector<double> history;  // observable at start_cutoff, start_cutoff + 1, ...
};

/// Smallest N >= start_cutoff with |obs(N+1) - obs(N)| < tol, searching up to
/// N + 1 = SpaceLayout::kMaxCutoff. Throws ConvergenceError otherwise.
CutoffConvergence converge_cutoff(const SystemParams& params, const StateObservable& observable,
                                  int start_cutoff, double tol);

}  // namespace entsim
