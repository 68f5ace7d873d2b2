#pragma once

#include <random>

#include "defectchain/hamiltonian.hpp"
#include "oracles.hpp"

namespace testing_support {

inline oracle::Chain to_oracle(const defectchain::ChainSpec& s) {
  oracle::Chain c;
  c.sites = s.sites;
  c.hopping = s.hopping;
  c.anisotropy = s.anisotropy;
  c.epsilon = s.level_spacing;
  c.defects = s.defects;
  c.periodic = s.boundary == defectchain::Boundary::periodic;
  return c;
}

inline defectchain::ChainSpec chain(int L, double delta = 0.0,
                                    std::map<int, double> defects = {},
                                    defectchain::Boundary b = defectchain::Boundary::periodic) {
  defectchain::ChainSpec s;
  s.sites = L;
  s.anisotropy = delta;
  s.defects = std::move(defects);
  s.boundary = b;
  return s;
}

/// Fixed-seed generator so property tests are reproducible.
inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240611);
  return gen;
}

inline Eigen::VectorXcd random_unit(Eigen::Index n) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = {g(rng()), g(rng())};
  return v / v.norm();
}

}  // namespace testing_support
