#include "entsim/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace entsim {

namespace {

void require_non_negative(double v, const char* field) {
  if (!std::isfinite(v) || v < 0.0) {
    throw std::invalid_argument(std::string(field) + " must be a finite value >= 0, got " +
                                std::to_string(v));
  }
}

void require_square(const Operator& m, int dim, const char* what) {
  if (m.rows() != dim || m.cols() != dim) {
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(dim) + "x" +
                                std::to_string(dim) + ", got " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()));
  }
}

}  // namespace

DetuningSign parse_detuning_sign(std::string_view s) {
  if (s == "printed") return DetuningSign::printed;
  if (s == "lab_consistent") return DetuningSign::lab_consistent;
  throw std::invalid_argument("unknown detuning sign '" + std::string(s) +
                              "' (expected printed or lab_consistent)");
}

std::string_view to_string(DetuningSign s) {
  return s == DetuningSign::printed ? "printed" : "lab_consistent";
}

void SystemParams::validate() const {
  require_non_negative(g, "g");
  require_non_negative(delta, "delta");
  require_non_negative(gamma, "gamma");
  require_non_negative(kappa, "kappa");
  require_non_negative(epsilon, "epsilon");
  if (kappa <= 0.0) throw std::invalid_argument("kappa must be > 0");
  if (!std::isfinite(omega_m)) throw std::invalid_argument("omega_m must be finite");
  SpaceLayout{fock_cutoff};  // range check
}

Schedule Schedule::constant(double value) {
  Schedule s;
  s.kind_ = Kind::constant;
  s.value_ = value;
  return s;
}

Schedule Schedule::tanh_down(double max_value, double t0, double lambda) {
  Schedule s;
  s.kind_ = Kind::tanh_down;
  s.value_ = max_value;
  s.t0_ = t0;
  s.lambda_ = lambda;
  return s;
}

Schedule Schedule::tanh_up(double max_value, double t0, double lambda) {
  Schedule s = tanh_down(max_value, t0, lambda);
  s.kind_ = Kind::tanh_up;
  return s;
}

double Schedule::operator()(double t) const {
  switch (kind_) {
    case Kind::constant: return value_;
    case Kind::tanh_down: return 0.5 * value_ * (1.0 - std::tanh(lambda_ * (t - t0_)));
    case Kind::tanh_up: return 0.5 * value_ * (1.0 + std::tanh(lambda_ * (t - t0_)));
  }
  return 0.0;
}

Schedule::Kind parse_schedule_kind(std::string_view s) {
  if (s == "constant") return Schedule::Kind::constant;
  if (s == "tanh_down") return Schedule::Kind::tanh_down;
  if (s == "tanh_up") return Schedule::Kind::tanh_up;
  throw std::invalid_argument("unknown schedule kind '" + std::string(s) +
                              "' (expected constant, tanh_down or tanh_up)");
}

std::string_view to_string(Schedule::Kind k) {
  switch (k) {
    case Schedule::Kind::constant: return "constant";
    case Schedule::Kind::tanh_down: return "tanh_down";
    case Schedule::Kind::tanh_up: return "tanh_up";
  }
  return "?";
}

Operator detuning_operator(const SpaceLayout& layout, DetuningSign sign) {
  const Operator d = embed(sigma_ee(), Subsystem::qubit1, layout) -
                     embed(sigma_ee(), Subsystem::qubit2, layout);
  return sign == DetuningSign::printed ? d : Operator(-d);
}

Operator coupling_operator(const SpaceLayout& layout) {
  const Operator a = embed(annihilation(layout.fock_cutoff()), Subsystem::mode, layout);
  const Operator sp = embed(sigma_plus(), Subsystem::qubit1, layout) +
                      embed(sigma_plus(), Subsystem::qubit2, layout);
  const Operator half = a * sp;
  return half + half.adjoint();
}

Operator pump_operator(const SpaceLayout& layout) {
  const Operator a = embed(annihilation(layout.fock_cutoff()), Subsystem::mode, layout);
  return a + a.adjoint();
}

Operator excitation_number(const SpaceLayout& layout) {
  return embed(sigma_ee(), Subsystem::qubit1, layout) +
         embed(sigma_ee(), Subsystem::qubit2, layout) +
         embed(number_operator(layout.fock_cutoff()), Subsystem::mode, layout);
}

Operator hamiltonian_lab(const SystemParams& p, const SpaceLayout& layout) {
  return p.omega_e1() * embed(sigma_ee(), Subsystem::qubit1, layout) +
         p.omega_e2() * embed(sigma_ee(), Subsystem::qubit2, layout) +
         p.omega_m * embed(number_operator(layout.fock_cutoff()), Subsystem::mode, layout) +
         p.g * coupling_operator(layout);
}

Operator hamiltonian_rot(const SystemParams& p, const SpaceLayout& layout) {
  return p.delta * detuning_operator(layout, p.sign) + p.g * coupling_operator(layout);
}

Operator hamiltonian_pump(double epsilon, const SpaceLayout& layout) {
  require_non_negative(epsilon, "epsilon");
  return epsilon * pump_operator(layout);
}

Operator hamiltonian_reduced(double g, double delta) {
  require_non_negative(g, "g");
  require_non_negative(delta, "delta");
  // Basis order: 0 = |E>, 1 = |Psi+>, 2 = |Psi->.
  Operator h = Operator::Zero(3, 3);
  h(1, 0) = h(0, 1) = std::sqrt(2.0) * g;
  h(2, 1) = h(1, 2) = delta;
  return h;
}

std::vector<Dissipator> dissipators(const SystemParams& p, const SpaceLayout& layout) {
  return {
      {embed(sigma_minus(), Subsystem::qubit1, layout), p.gamma},
      {embed(sigma_minus(), Subsystem::qubit2, layout), p.gamma},
      {embed(annihilation(layout.fock_cutoff()), Subsystem::mode, layout), p.kappa},
  };
}

Operator apply_dissipator(const Dissipator& d, const Operator& rho) {
  const Operator ldl = d.jump.adjoint() * d.jump;
  return d.rate * (2.0 * d.jump * rho * d.jump.adjoint() - ldl * rho - rho * ldl);
}

Operator lindblad_rhs(const Operator& hamiltonian, std::span<const Dissipator> ds,
                      const Operator& rho) {
  const cplx i(0.0, 1.0);
  Operator out = -i * (hamiltonian * rho - rho * hamiltonian);
  for (const auto& d : ds) out += apply_dissipator(d, rho);
  return out;
}

int Superoperator::hilbert_dim() const {
  return static_cast<int>(std::lround(std::sqrt(static_cast<double>(matrix.rows()))));
}

namespace {

// out += scale * (a (x) b), visiting only the nonzero entries of a.
void add_kron(Eigen::MatrixXcd& out, const Operator& a, const Operator& b, cplx scale) {
  const Eigen::Index d = b.rows();
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (a(i, j) == cplx(0.0)) continue;
      out.block(i * d, j * d, d, d) += (scale * a(i, j)) * b;
    }
  }
}

}  // namespace

Superoperator liouvillian(const Operator& hamiltonian, std::span<const Dissipator> ds) {
  const int d = static_cast<int>(hamiltonian.rows());
  require_square(hamiltonian, d, "liouvillian: hamiltonian");
  const Operator id = Operator::Identity(d, d);
  const cplx i(0.0, 1.0);

  // vec(A X B) = (B^T (x) A) vec(X) for column stacking.
  Eigen::MatrixXcd l = Eigen::MatrixXcd::Zero(d * d, d * d);
  add_kron(l, id, hamiltonian, -i);
  add_kron(l, hamiltonian.transpose(), id, i);
  for (const auto& diss : ds) {
    require_square(diss.jump, d, "liouvillian: jump operator");
    if (diss.rate == 0.0) continue;
    const Operator ldl = diss.jump.adjoint() * diss.jump;
    add_kron(l, diss.jump.conjugate(), diss.jump, 2.0 * diss.rate);
    add_kron(l, id, ldl, -diss.rate);
    add_kron(l, ldl.transpose(), id, -diss.rate);
  }
  return Superoperator{std::move(l)};
}

Superoperator steady_liouvillian(const SystemParams& p) {
  p.validate();
  const SpaceLayout layout(p.fock_cutoff);
  const Operator h = hamiltonian_rot(p, layout) + hamiltonian_pump(p.epsilon, layout);
  const auto ds = dissipators(p, layout);
  return liouvillian(h, ds);
}

Eigen::VectorXcd vec(const Operator& m) {
  return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

Operator unvec(const Eigen::VectorXcd& v, int dim) {
  if (v.size() != static_cast<Eigen::Index>(dim) * dim) {
    throw std::invalid_argument("unvec: vector length " + std::to_string(v.size()) +
                                " is not " + std::to_string(dim) + "^2");
  }
  return Eigen::Map<const Operator>(v.data(), dim, dim);
}

}  // namespace entsim
