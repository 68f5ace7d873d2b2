#include "defectchain/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "defectchain/errors.hpp"

namespace defectchain {

StateVector::StateVector(BasisPtr basis, Eigen::VectorXcd amplitudes)
    : basis_(std::move(basis)), amplitudes_(std::move(amplitudes)) {
  if (!basis_) throw DomainError("state vector needs a basis");
  if (static_cast<std::size_t>(amplitudes_.size()) != basis_->size()) {
    throw DomainError("amplitude count does not match basis size");
  }
}

StateVector StateVector::basis_state(BasisPtr basis, const Configuration& c) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(basis->size());
  v(basis->index_of(c)) = 1.0;
  return StateVector(std::move(basis), std::move(v));
}

Complex StateVector::amplitude(const Configuration& c) const {
  if (c.chain_sites() != basis_->chain_sites()) throw DomainError("configuration length mismatch");
  if (auto i = basis_->find(c)) return amplitudes_(*i);
  return 0.0;
}

StateVector StateVector::normalized() const {
  const double n = norm();
  if (!(n > 0.0)) throw DomainError("cannot normalize a zero vector");
  return StateVector(basis_, amplitudes_ / n);
}

void require_normalized(const StateVector& psi, const char* what) {
  if (std::abs(psi.norm() - 1.0) > 1e-9) {
    throw DomainError(std::string(what) + ": state is not normalized");
  }
}

void require_same_basis(const SectorBasis& a, const SectorBasis& b, const char* what) {
  if (!a.same_as(b)) throw DomainError(std::string(what) + ": basis mismatch");
}

EigenSystem diagonalize(const SectorMatrix& h) {
  const Eigen::MatrixXd& m = h.entries;
  if (m.rows() != m.cols()) throw DomainError("diagonalize: matrix is not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-14 * scale) {
    throw DomainError("diagonalize: matrix is not symmetric");
  }
  // Shifting by the mean diagonal keeps the large uniform level spacing out
  // of the eigensolver's working precision.
  const double shift = m.rows() > 0 ? m.diagonal().mean() : 0.0;
  Eigen::MatrixXd shifted = m;
  shifted.diagonal().array() -= shift;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(shifted);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "eigensolver failed to converge (dimension " << m.rows() << ", max |H_ij| "
        << m.cwiseAbs().maxCoeff() << ")";
    throw NumericalError(msg.str());
  }
  EigenSystem out{h.basis, solver.eigenvalues(), solver.eigenvectors()};
  const double residual =
      (shifted * out.vectors - out.vectors * out.values.asDiagonal()).cwiseAbs().maxCoeff();
  const double hnorm = std::max(shifted.cwiseAbs().maxCoeff(), 1e-300);
  if (residual > 1e-10 * hnorm * std::max<Eigen::Index>(1, m.rows())) {
    std::ostringstream msg;
    msg << "eigendecomposition residual " << residual << " exceeds bound for |H| " << hnorm;
    throw NumericalError(msg.str());
  }
  out.values.array() += shift;
  return out;
}

StateVector propagate_static(const EigenSystem& eig, const StateVector& psi0, double t) {
  require_same_basis(*eig.basis, *psi0.basis(), "propagate_static");
  require_normalized(psi0, "propagate_static");
  if (eig.values.size() == 0) return psi0;
  const double ref = eig.values(0);
  Eigen::VectorXcd coeff = eig.vectors.transpose().cast<Complex>() * psi0.amplitudes();
  for (Eigen::Index k = 0; k < coeff.size(); ++k) {
    coeff(k) *= std::polar(1.0, -(eig.values(k) - ref) * t);
  }
  Eigen::VectorXcd out = eig.vectors.cast<Complex>() * coeff;
  out *= std::polar(1.0, -ref * t);
  return StateVector(psi0.basis(), std::move(out));
}

double expectation(const SectorMatrix& h, const StateVector& psi) {
  require_same_basis(*h.basis, *psi.basis(), "expectation");
  const Eigen::VectorXcd hv = h.entries.cast<Complex>() * psi.amplitudes();
  return psi.amplitudes().dot(hv).real() / psi.amplitudes().squaredNorm();
}

namespace {

/// H(t) - reference in a form cheap to apply: diagonal, CSR off-diagonal,
/// and one 0/1 mask per detuned site.
class CompiledHamiltonian {
 public:
  explicit CompiledHamiltonian(const DrivenHamiltonian& h) : schedule_(h.schedule) {
    const Eigen::MatrixXd& m = h.static_part.entries;
    const auto dim = m.rows();
    diag_ = m.diagonal();
    reference_ = dim > 0 ? 0.5 * (diag_.maxCoeff() + diag_.minCoeff()) : 0.0;
    diag_.array() -= reference_;
    row_start_.push_back(0);
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index j = 0; j < dim; ++j) {
        if (i != j && m(i, j) != 0.0) {
          cols_.push_back(static_cast<int>(j));
          vals_.push_back(m(i, j));
        }
      }
      row_start_.push_back(static_cast<int>(cols_.size()));
    }
    const SectorBasis& basis = *h.static_part.basis;
    for (const auto& entry : schedule_) {
      Eigen::VectorXd mask = Eigen::VectorXd::Zero(dim);
      for (std::size_t i = 0; i < basis.size(); ++i) mask(i) = basis[i].excited(entry.site);
      masks_.push_back(std::move(mask));
    }
  }

  double reference() const { return reference_; }

  void diagonal_at(double t, Eigen::VectorXd& out) const {
    out = diag_;
    for (std::size_t s = 0; s < schedule_.size(); ++s) {
      const double delta = schedule_[s].offset_at(t);
      if (delta != 0.0) out += delta * masks_[s];
    }
  }

  /// out = -i (H(t) - reference) in
  void derivative(const Eigen::VectorXd& diag, const Eigen::VectorXcd& in,
                  Eigen::VectorXcd& out) const {
    const auto dim = in.size();
    for (Eigen::Index i = 0; i < dim; ++i) {
      Complex acc = diag(i) * in(i);
      for (int k = row_start_[i]; k < row_start_[i + 1]; ++k) acc += vals_[k] * in(cols_[k]);
      out(i) = Complex(acc.imag(), -acc.real());
    }
  }

  /// Gershgorin bound on the spectral radius of H(t) - reference.
  double spectral_bound(double t) const {
    Eigen::VectorXd d;
    diagonal_at(t, d);
    double bound = 0.0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      double r = std::abs(d(i));
      for (int k = row_start_[i]; k < row_start_[i + 1]; ++k) r += std::abs(vals_[k]);
      bound = std::max(bound, r);
    }
    return bound;
  }

 private:
  DetuningSchedule schedule_;
  Eigen::VectorXd diag_;
  double reference_ = 0.0;
  std::vector<int> row_start_;
  std::vector<int> cols_;
  std::vector<double> vals_;
  std::vector<Eigen::VectorXd> masks_;
};

void check_times(std::span<const double> times) {
  if (times.size() < 2) throw DomainError("need a start time and at least one snapshot");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw DomainError("snapshot times must be strictly increasing");
  }
}

/// Fixed-substep RK4 over all snapshot intervals; amplitudes are returned
/// in the frame rotating at the reference energy.
std::vector<Eigen::VectorXcd> run_rk4(const CompiledHamiltonian& op, const Eigen::VectorXcd& psi0,
                                      std::span<const double> times,
                                      std::span<const long long> substeps) {
  const auto dim = psi0.size();
  std::vector<Eigen::VectorXcd> out;
  out.reserve(times.size());
  out.push_back(psi0);
  Eigen::VectorXcd y = psi0, k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  Eigen::VectorXd d0, dmid, d1;
  for (std::size_t iv = 0; iv + 1 < times.size(); ++iv) {
    const long long m = substeps[iv];
    const double t0 = times[iv];
    const double h = (times[iv + 1] - t0) / static_cast<double>(m);
    op.diagonal_at(t0, d1);
    for (long long s = 0; s < m; ++s) {
      const double t = t0 + static_cast<double>(s) * h;
      d0.swap(d1);
      op.diagonal_at(t + 0.5 * h, dmid);
      op.diagonal_at(s + 1 == m ? times[iv + 1] : t + h, d1);
      op.derivative(d0, y, k1);
      tmp = y + (0.5 * h) * k1;
      op.derivative(dmid, tmp, k2);
      tmp = y + (0.5 * h) * k2;
      op.derivative(dmid, tmp, k3);
      tmp = y + h * k3;
      op.derivative(d1, tmp, k4);
      y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    out.push_back(y);
  }
  return out;
}

std::vector<StateVector> to_lab_frame(const std::vector<Eigen::VectorXcd>& amps, double reference,
                                      std::span<const double> times, const BasisPtr& basis) {
  std::vector<StateVector> out;
  out.reserve(amps.size());
  for (std::size_t i = 0; i < amps.size(); ++i) {
    out.emplace_back(basis, amps[i] * std::polar(1.0, -reference * (times[i] - times[0])));
  }
  return out;
}

bool all_finite(const std::vector<Eigen::VectorXcd>& run) {
  for (const auto& v : run)
    if (!v.allFinite()) return false;
  return true;
}

}  // namespace

std::vector<double> uniform_times(double t_start, double t_end, std::size_t intervals) {
  if (intervals == 0) throw DomainError("need at least one snapshot interval");
  std::vector<double> out(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) {
    out[i] = t_start + (t_end - t_start) * static_cast<double>(i) / static_cast<double>(intervals);
  }
  out.back() = t_end;
  return out;
}

std::vector<StateVector> integrate_rk4(const DrivenHamiltonian& h, const StateVector& psi0,
                                       std::span<const double> snapshot_times, double max_step) {
  require_same_basis(*h.static_part.basis, *psi0.basis(), "integrate_rk4");
  check_times(snapshot_times);
  if (!(max_step > 0.0)) throw DomainError("step must be positive");
  const CompiledHamiltonian op(h);
  std::vector<long long> substeps;
  for (std::size_t i = 0; i + 1 < snapshot_times.size(); ++i) {
    const double len = snapshot_times[i + 1] - snapshot_times[i];
    substeps.push_back(std::max(1LL, static_cast<long long>(std::ceil(len / max_step - 1e-12))));
  }
  const auto run = run_rk4(op, psi0.amplitudes(), snapshot_times, substeps);
  return to_lab_frame(run, op.reference(), snapshot_times, psi0.basis());
}

ScheduledEvolution propagate_scheduled(const DrivenHamiltonian& h, const StateVector& psi0,
                                       std::span<const double> snapshot_times,
                                       const PropagationOptions& options) {
  require_same_basis(*h.static_part.basis, *psi0.basis(), "propagate_scheduled");
  require_normalized(psi0, "propagate_scheduled");
  check_times(snapshot_times);
  if (!(options.tolerance > 0.0)) throw DomainError("tolerance must be positive");
  validate_schedule(h.schedule, psi0.basis()->chain_sites());

  const CompiledHamiltonian op(h);
  const double t0 = snapshot_times.front();
  const double t1 = snapshot_times.back();
  double step = options.initial_step;
  if (!(step > 0.0)) {
    const double rho = std::max(op.spectral_bound(t1), op.spectral_bound(t0));
    step = rho > 0.0 ? 1.0 / rho : (t1 - t0);
  }

  std::vector<long long> substeps;
  for (std::size_t i = 0; i + 1 < snapshot_times.size(); ++i) {
    const double len = snapshot_times[i + 1] - snapshot_times[i];
    substeps.push_back(std::max(1LL, static_cast<long long>(std::ceil(len / step - 1e-12))));
  }
  auto largest_step = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < substeps.size(); ++i) {
      s = std::max(s, (snapshot_times[i + 1] - snapshot_times[i]) / static_cast<double>(substeps[i]));
    }
    return s;
  };
  auto total_steps = [&]() {
    double n = 0.0;
    for (long long m : substeps) n += static_cast<double>(m);
    return n;
  };
  auto drift_rate = [&](const std::vector<Eigen::VectorXcd>& run) {
    const double n0 = psi0.norm();
    double worst = 0.0;
    for (std::size_t i = 1; i < run.size(); ++i) {
      worst = std::max(worst, std::abs(run[i].norm() - n0) / (snapshot_times[i] - t0));
    }
    return worst;
  };

  ScheduledEvolution result;
  std::vector<Eigen::VectorXcd> previous = run_rk4(op, psi0.amplitudes(), snapshot_times, substeps);
  double last_stable = all_finite(previous) ? largest_step() : 0.0;
  bool observables_converged = false;
  for (int level = 1;; ++level) {
    for (auto& m : substeps) m *= 2;
    const double h_now = largest_step();
    if (h_now < options.min_step || total_steps() > options.max_total_steps) {
      if (!observables_converged) {
        std::ostringstream msg;
        msg << "step-size underflow: no convergence to tolerance " << options.tolerance
            << " down to step " << h_now;
        throw NumericalError(msg.str(), last_stable);
      }
      // Observables settled but the norm bound did not: renormalize.
      std::ostringstream msg;
      msg << "norm drift " << drift_rate(previous) << " per unit time exceeds "
          << options.max_norm_drift_rate << " at the smallest affordable step; renormalized";
      result.log.push_back(msg.str());
      for (auto& v : previous) v /= v.norm() / psi0.norm();
      result.renormalized = true;
      result.refinements = level - 1;
      for (auto& m : substeps) m /= 2;
      result.step = largest_step();
      break;
    }
    std::vector<Eigen::VectorXcd> current = run_rk4(op, psi0.amplitudes(), snapshot_times, substeps);
    if (!all_finite(current)) {
      previous = std::move(current);
      continue;
    }
    last_stable = h_now;
    double change = all_finite(previous) ? 0.0 : std::numeric_limits<double>::infinity();
    if (std::isfinite(change)) {
      for (std::size_t i = 0; i < current.size(); ++i) {
        change = std::max(change, (current[i] - previous[i]).cwiseAbs().maxCoeff());
      }
    }
    observables_converged = change < options.tolerance;
    previous = std::move(current);
    if (observables_converged && drift_rate(previous) <= options.max_norm_drift_rate) {
      result.refinements = level;
      result.step = h_now;
      break;
    }
  }
  result.norm_drift_rate = drift_rate(previous);
  result.times.assign(snapshot_times.begin(), snapshot_times.end());
  result.states = to_lab_frame(previous, op.reference(), snapshot_times, psi0.basis());
  return result;
}

ScheduledEvolution propagate_scheduled(const ChainSpec& spec, const DetuningSchedule& schedule,
                                       const StateVector& psi0, double t_start, double t_end,
                                       double tolerance, std::size_t snapshots) {
  if (!(t_end > t_start)) throw DomainError("t_end must exceed t_start");
  DrivenHamiltonian h{build_static(spec, psi0.basis()->excitations()), schedule};
  require_same_basis(*h.static_part.basis, *psi0.basis(), "propagate_scheduled");
  const auto times = uniform_times(t_start, t_end, snapshots);
  PropagationOptions options;
  options.tolerance = tolerance;
  return propagate_scheduled(h, psi0, times, options);
}

std::vector<double> site_probabilities(const StateVector& psi) {
  const SectorBasis& basis = *psi.basis();
  std::vector<double> out(basis.chain_sites(), 0.0);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double p = std::norm(psi.amplitudes()(i));
    const std::uint32_t bits = basis[i].bits();
    for (int n = 0; n < basis.chain_sites(); ++n)
      if ((bits >> n) & 1u) out[n] += p;
  }
  return out;
}

double basis_probability(const StateVector& psi, const Configuration& c) {
  return std::norm(psi.amplitude(c));
}

void TimeSeries::add_channel(std::string name, std::vector<double> channel) {
  if (channel.size() != times.size()) throw DomainError("channel length differs from time axis");
  if (has_channel(name)) throw DomainError("duplicate channel " + name);
  names.push_back(std::move(name));
  values.push_back(std::move(channel));
}

const std::vector<double>& TimeSeries::channel(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw DomainError("unknown channel " + name);
  return values[static_cast<std::size_t>(it - names.begin())];
}

bool TimeSeries::has_channel(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

}  // namespace defectchain
