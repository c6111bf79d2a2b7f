#include "entsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/LU>
#include <Eigen/SparseCore>
#include <unsupported/Eigen/MatrixFunctions>

#include "entsim/measures.hpp"
#include "hermitian_coords.hpp"

namespace entsim {

namespace {

using SparseOp = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

SparseOp to_sparse(const Operator& m) { return m.sparseView(0.0, 0.0); }

// RMS of err / (atol + rtol * max(|y0|, |y1|)).
template <typename V>
double error_norm(const V& err, const V& y0, const V& y1, double rtol, double atol) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double scale = atol + rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    const double r = std::abs(err(i)) / scale;
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(err.size()));
}

void check_samples(std::span<const double> samples, TimeSpan span) {
  if (!(span.end >= span.start) || !std::isfinite(span.start) || !std::isfinite(span.end)) {
    throw std::invalid_argument("time span must be finite with end >= start");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i] < span.start || samples[i] > span.end) {
      throw std::invalid_argument("sample time " + std::to_string(samples[i]) +
                                  " lies outside the time span");
    }
    if (i > 0 && !(samples[i] > samples[i - 1])) {
      throw std::invalid_argument("sample times must be strictly increasing");
    }
  }
}

class Recorder {
 public:
  Recorder(Trajectory& traj, std::span<const Observable> obs) : traj_(traj), obs_(obs) {
    for (const auto& o : obs) {
      traj_.observable_names.push_back(o.name);
      traj_.observables.emplace_back();
    }
  }

  void record(double t, const Operator& raw) {
    Operator rho = 0.5 * (raw + raw.adjoint());
    const Physicality p = physicality(raw);
    traj_.stats.worst_sample = worst(traj_.stats.worst_sample, p);
    if (!is_physical(p, kSampleTolerances)) {
      throw IntegrationError("sampled state is unphysical (" + describe(p) + ")", t);
    }
    for (std::size_t k = 0; k < obs_.size(); ++k) traj_.observables[k].push_back(obs_[k].fn(rho));
    traj_.times.push_back(t);
    traj_.states.push_back(DensityMatrix::unchecked(std::move(rho)));
  }

 private:
  Trajectory& traj_;
  std::span<const Observable> obs_;
};

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

class DormandPrince {
 public:
  DormandPrince(const Generator& gen, const IntegratorConfig& cfg, IntegrationStats& stats)
      : gen_(gen), cfg_(cfg), stats_(stats) {
    const int d = gen.dim();
    for (auto* m : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &tmp_, &ynew_}) {
      m->setZero(d, d);
    }
  }

  void start(double t, const Operator& y) {
    eval(t, y, k1_);
    if (cfg_.initial_step > 0.0) {
      h_ = cfg_.initial_step;
    } else {
      const double d0 = error_norm(y, y, y, cfg_.rtol, cfg_.atol);
      const double d1 = error_norm(k1_, y, y, cfg_.rtol, cfg_.atol);
      h_ = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    }
    h_ = std::min(h_, cfg_.max_step);
  }

  // Integrates y from t to t_end exactly.
  void advance(double& t, Operator& y, double t_end) {
    while (t < t_end) {
      if (stats_.accepted + stats_.rejected >= cfg_.max_steps) {
        throw IntegrationError("step budget exhausted", t);
      }
      double h = std::min(h_, cfg_.max_step);
      bool clipped = false;
      // Stretch onto t_end rather than leave a roundoff sliver.
      if (t + 1.001 * h >= t_end) {
        h = t_end - t;
        clipped = true;
      }
      const double min_step = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
      if (h < min_step) throw IntegrationError("step size underflow (h = " + std::to_string(h) + ")", t);

      tmp_ = y + h * a21 * k1_;
      eval(t + c2 * h, tmp_, k2_);
      tmp_ = y + h * (a31 * k1_ + a32 * k2_);
      eval(t + c3 * h, tmp_, k3_);
      tmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
      eval(t + c4 * h, tmp_, k4_);
      tmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
      eval(t + c5 * h, tmp_, k5_);
      tmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
      eval(t + h, tmp_, k6_);
      ynew_ = y + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
      eval(t + h, ynew_, k7_);
      tmp_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);

      const double err = error_norm(tmp_, y, ynew_, cfg_.rtol, cfg_.atol);
      if (!std::isfinite(err)) throw IntegrationError("non-finite error estimate", t);
      if (err <= 1.0) {
        ++stats_.accepted;
        t = clipped ? t_end : t + h;
        y.swap(ynew_);
        k1_.swap(k7_);
        const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        const double proposal = (last_rejected_ ? std::min(1.0, fac) : fac) * h;
        // A clipped step says nothing about the natural step size.
        h_ = clipped ? std::max(h_, proposal) : proposal;
        last_rejected_ = false;
      } else {
        ++stats_.rejected;
        h_ = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
        last_rejected_ = true;
      }
    }
  }

 private:
  void eval(double t, const Operator& y, Operator& out) {
    ++stats_.rhs_evaluations;
    gen_(t, y, out);
  }

  const Generator& gen_;
  const IntegratorConfig& cfg_;
  IntegrationStats& stats_;
  double h_ = 0.0;
  bool last_rejected_ = false;
  Operator k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, ynew_;
};

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rtol > 0.0)) throw std::invalid_argument("rtol must be > 0");
  if (!(atol > 0.0)) throw std::invalid_argument("atol must be > 0");
  if (!(max_step > 0.0)) throw std::invalid_argument("max_step must be > 0");
  if (initial_step < 0.0) throw std::invalid_argument("initial_step must be >= 0");
  if (max_steps <= 0) throw std::invalid_argument("max_steps must be > 0");
}

Generator Generator::constant(const Superoperator& l) {
  const int d = l.hilbert_dim();
  return Generator(d, [m = l.matrix, d](double, const Operator& rho, Operator& out) {
    const Eigen::VectorXcd v = m * Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
    out = Eigen::Map<const Operator>(v.data(), d, d);
  });
}

Generator Generator::from_superoperator(int dim, std::function<Superoperator(double)> l) {
  return Generator(dim, [l = std::move(l), dim](double t, const Operator& rho, Operator& out) {
    const Superoperator sup = l(t);
    const Eigen::VectorXcd v = sup.matrix * Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
    out = Eigen::Map<const Operator>(v.data(), dim, dim);
  });
}

Generator Generator::lindblad(std::vector<HamiltonianTerm> terms, std::vector<Dissipator> ds) {
  if (terms.empty() && ds.empty()) {
    throw std::invalid_argument("Generator::lindblad: needs at least one term or dissipator");
  }
  const int d = static_cast<int>(!terms.empty() ? terms.front().op.rows() : ds.front().jump.rows());
  const cplx i(0.0, 1.0);

  // H_eff = H - i K with K = sum rate L^dag L; constant terms fold into it.
  Operator heff = Operator::Zero(d, d);
  struct Timed {
    SparseOp op;
    Schedule coeff;
  };
  std::vector<Timed> timed;
  for (auto& term : terms) {
    if (term.op.rows() != d || term.op.cols() != d) {
      throw std::invalid_argument("Generator::lindblad: Hamiltonian term dimension mismatch");
    }
    if (term.coefficient.kind() == Schedule::Kind::constant) {
      heff += term.coefficient(0.0) * term.op;
    } else {
      timed.push_back({to_sparse(term.op), term.coefficient});
    }
  }
  struct Jump {
    SparseOp op;
    SparseOp adj;
    double rate;
  };
  std::vector<Jump> jumps;
  for (const auto& diss : ds) {
    if (diss.jump.rows() != d || diss.jump.cols() != d) {
      throw std::invalid_argument("Generator::lindblad: jump operator dimension mismatch");
    }
    if (diss.rate == 0.0) continue;
    heff -= i * diss.rate * (diss.jump.adjoint() * diss.jump);
    jumps.push_back({to_sparse(diss.jump), to_sparse(diss.jump.adjoint()), diss.rate});
  }
  SparseOp heff_sp = to_sparse(heff);
  SparseOp heff_adj = to_sparse(heff.adjoint());

  auto fn = [heff_sp, heff_adj, timed = std::move(timed), jumps = std::move(jumps), i](
                double t, const Operator& rho, Operator& out) {
    // -i (H_eff rho - rho H_eff^dag) + sum 2 rate L rho L^dag
    Operator left = heff_sp * rho;
    Operator right = rho * heff_adj;
    for (const auto& term : timed) {
      const double c = term.coeff(t);
      if (c == 0.0) continue;
      left.noalias() += c * (term.op * rho);
      right.noalias() += c * (rho * term.op);
    }
    out = -i * (left - right);
    for (const auto& j : jumps) {
      const Operator lr = j.op * rho;
      out.noalias() += (2.0 * j.rate) * (lr * j.adj);
    }
  };
  return Generator(d, std::move(fn));
}

const std::vector<double>& Trajectory::column(std::string_view name) const {
  for (std::size_t k = 0; k < observable_names.size(); ++k) {
    if (observable_names[k] == name) return observables[k];
  }
  throw std::out_of_range("trajectory has no observable '" + std::string(name) + "'");
}

Trajectory evolve(const DensityMatrix& rho0, const Generator& generator, TimeSpan span,
                  std::span<const double> sample_times, const IntegratorConfig& cfg,
                  std::span<const Observable> observables) {
  cfg.validate();
  check_samples(sample_times, span);
  if (rho0.dim() != generator.dim()) {
    throw std::invalid_argument("evolve: initial state dimension " + std::to_string(rho0.dim()) +
                                " does not match generator dimension " +
                                std::to_string(generator.dim()));
  }
  if (!is_physical(rho0.physicality())) {
    throw std::invalid_argument("evolve: initial state is not a valid density matrix");
  }

  Trajectory traj;
  Recorder rec(traj, observables);
  DormandPrince stepper(generator, cfg, traj.stats);
  double t = span.start;
  Operator y = rho0.matrix();
  stepper.start(t, y);
  for (double ts : sample_times) {
    stepper.advance(t, y, ts);
    rec.record(ts, y);
  }
  stepper.advance(t, y, span.end);
  return traj;
}

GridPropagator::GridPropagator(const Superoperator& l, double base_step)
    : dim_(l.hilbert_dim()), h_(base_step) {
  if (!(base_step > 0.0) || !std::isfinite(base_step)) {
    throw std::invalid_argument("GridPropagator: base_step must be finite and > 0");
  }
  const Eigen::MatrixXd m = detail::real_representation(l);
  powers_.push_back((base_step * m).exp());
}

Operator GridPropagator::apply(const Operator& rho, std::uint64_t steps) {
  if (rho.rows() != dim_ || rho.cols() != dim_) {
    throw std::invalid_argument("GridPropagator: state dimension does not match Liouvillian");
  }
  Eigen::VectorXd x = detail::to_coords(rho);
  for (std::size_t j = 0; steps != 0; ++j, steps >>= 1) {
    if (j == powers_.size()) {
      Eigen::MatrixXd sq(powers_.back().rows(), powers_.back().cols());
      sq.noalias() = powers_.back() * powers_.back();
      powers_.push_back(std::move(sq));
    }
    if (steps & 1u) x = powers_[j] * x;
  }
  return detail::from_coords(x, dim_);
}

SteadyState solve_steady_state(const Superoperator& l) {
  const int d = l.hilbert_dim();
  Eigen::MatrixXd m = detail::real_representation(l);
  const Eigen::Index n = m.rows();

  // Replace the (0,0) diagonal equation with tr rho = 1.
  m.row(0).setZero();
  for (int k = 0; k < d; ++k) m(0, k + static_cast<Eigen::Index>(k) * d) = 1.0;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(0) = 1.0;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  // PartialPivLU's estimate misses exact zero pivots, so also check the pivot spread.
  const Eigen::VectorXd pivots = lu.matrixLU().diagonal().cwiseAbs();
  const double spread = pivots.minCoeff() / pivots.maxCoeff();
  const double rcond = std::min(lu.rcond(), spread);
  if (!(rcond > 1e-14) || !(spread > static_cast<double>(n) * std::numeric_limits<double>::epsilon())) {
    throw SteadyStateError("steady-state system is singular (rcond = " + std::to_string(rcond) +
                           "); the stationary manifold is degenerate");
  }
  const Eigen::VectorXd x = lu.solve(rhs);
  if (!x.allFinite()) throw SteadyStateError("steady-state solve produced non-finite entries");

  Operator rho = detail::from_coords(x, d);
  const double residual = (l.matrix * vec(rho)).cwiseAbs().maxCoeff();
  const Physicality p = physicality(rho);
  if (p.min_eigenvalue < -1e-8) {
    throw SteadyStateError("steady state has negative eigenvalue " +
                           std::to_string(p.min_eigenvalue));
  }
  return SteadyState{DensityMatrix::unchecked(std::move(rho)), residual, p.min_eigenvalue, rcond};
}

DensityMatrix steady_state(const Superoperator& l, const SpaceLayout& layout) {
  if (l.hilbert_dim() != layout.dim()) {
    throw std::invalid_argument("steady_state: Liouvillian does not match the layout");
  }
  return solve_steady_state(l).rho;
}

CutoffConvergence converge_cutoff(const SystemParams& params, const StateObservable& observable,
                                  int start_cutoff, double tol) {
  if (start_cutoff < 1) throw std::invalid_argument("converge_cutoff: start_cutoff must be >= 1");
  if (start_cutoff >= SpaceLayout::kMaxCutoff) {
    throw std::invalid_argument("converge_cutoff: start_cutoff must be below " +
                                std::to_string(SpaceLayout::kMaxCutoff));
  }
  auto value_at = [&](int cutoff) {
    SystemParams p = params;
    p.fock_cutoff = cutoff;
    const SpaceLayout layout(cutoff);
    return observable(steady_state(steady_liouvillian(p), layout), layout);
  };
  CutoffConvergence out;
  out.history.push_back(value_at(start_cutoff));
  for (int n = start_cutoff; n < SpaceLayout::kMaxCutoff; ++n) {
    out.history.push_back(value_at(n + 1));
    const double diff = std::abs(out.history.back() - out.history[out.history.size() - 2]);
    if (diff < tol) {
      out.cutoff = n;
      out.value = out.history.back();
      return out;
    }
  }
  throw ConvergenceError(
      "observable not converged to " + std::to_string(tol) + " by cutoff " +
      std::to_string(SpaceLayout::kMaxCutoff) + " (last change " +
      std::to_string(std::abs(out.history.back() - out.history[out.history.size() - 2])) + ")");
}

}  // namespace entsim
