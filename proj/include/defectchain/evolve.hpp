#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "defectchain/hamiltonian.hpp"

namespace defectchain {

using Complex = std::complex<double>;

/// Complex amplitudes over a basis.
class StateVector {
 public:
  StateVector(BasisPtr basis, Eigen::VectorXcd amplitudes);

  /// Unit vector on one configuration.
  static StateVector basis_state(BasisPtr basis, const Configuration& c);

  const BasisPtr& basis() const noexcept { return basis_; }
  const Eigen::VectorXcd& amplitudes() const noexcept { return amplitudes_; }
  Eigen::VectorXcd& amplitudes() noexcept { return amplitudes_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(amplitudes_.size()); }

  /// Amplitude of `c`, zero when the configuration lies outside the basis.
  Complex amplitude(const Configuration& c) const;
  double norm() const { return amplitudes_.norm(); }
  StateVector normalized() const;

 private:
  BasisPtr basis_;
  Eigen::VectorXcd amplitudes_;
};

/// Throws DomainError unless |norm - 1| <= 1e-9.
void require_normalized(const StateVector& psi, const char* what);
/// Throws DomainError unless both live on the same basis.
void require_same_basis(const SectorBasis& a, const SectorBasis& b, const char* what);

struct EigenSystem {
  BasisPtr basis;
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // orthonormal columns
};

EigenSystem diagonalize(const SectorMatrix& h);

/// psi(t) = V exp(-i E t) V^T psi0.
StateVector propagate_static(const EigenSystem& eig, const StateVector& psi0, double t);

double expectation(const SectorMatrix& h, const StateVector& psi);

/// Static block plus diagonal detuning that switches on per schedule.
struct DrivenHamiltonian {
  SectorMatrix static_part;
  DetuningSchedule schedule;
};

struct PropagationOptions {
  double tolerance = 1e-6;            // max amplitude change between refinements
  double max_norm_drift_rate = 1e-9;  // |norm - 1| per unit time
  double initial_step = 0.0;          // 0 picks a stability-based step
  double min_step = 1e-10;
  double max_total_steps = 4e8;
};

struct ScheduledEvolution {
  std::vector<double> times;
  std::vector<StateVector> states;
  double step = 0.0;          // largest substep of the accepted run
  int refinements = 0;
  double norm_drift_rate = 0.0;
  bool renormalized = false;
  std::vector<std::string> log;
};

/// Integrates i dpsi/dt = H(t) psi with classical RK4 on a fixed step,
/// halving the step until successive runs agree to `tolerance` at every
/// snapshot and the norm drift bound holds. `snapshot_times` must be
/// strictly increasing; the first entry is the start time.
ScheduledEvolution propagate_scheduled(const DrivenHamiltonian& h, const StateVector& psi0,
                                       std::span<const double> snapshot_times,
                                       const PropagationOptions& options = {});

/// Chain-level convenience: full sector of `spec`, `snapshots` uniform
/// intervals on [t_start, t_end].
ScheduledEvolution propagate_scheduled(const ChainSpec& spec, const DetuningSchedule& schedule,
                                       const StateVector& psi0, double t_start, double t_end,
                                       double tolerance, std::size_t snapshots = 200);

/// One fixed-step RK4 pass; every snapshot interval is split into
/// ceil(length / max_step) equal substeps.
std::vector<StateVector> integrate_rk4(const DrivenHamiltonian& h, const StateVector& psi0,
                                       std::span<const double> snapshot_times, double max_step);

std::vector<double> uniform_times(double t_start, double t_end, std::size_t intervals);

/// Occupation probability of each site, index 0 is site 1.
std::vector<double> site_probabilities(const StateVector& psi);
double basis_probability(const StateVector& psi, const Configuration& c);

/// Named per-time channels sharing one time axis.
struct TimeSeries {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;

  void add_channel(std::string name, std::vector<double> channel);
  const std::vector<double>& channel(const std::string& name) const;
  bool has_channel(const std::string& name) const;
};

}  // namespace defectchain
