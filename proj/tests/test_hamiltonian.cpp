#include "doctest.h"

#include "defectchain/errors.hpp"
#include "defectchain/evolve.hpp"
#include "support.hpp"

using namespace defectchain;
using testing_support::chain;
using testing_support::to_oracle;

namespace {

double max_entry_diff(const SectorMatrix& h, const oracle::Mat& ref) {
  return (h.entries.cast<Complex>() - ref).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("sector blocks equal the Pauli-tensor construction") {
  for (const auto boundary : {Boundary::periodic, Boundary::open}) {
    for (int L = 2; L <= 6; ++L) {
      ChainSpec s = chain(L, 1.7, {{1, 3.0}, {L, 0.5}}, boundary);
      s.level_spacing = 40.0;
      const oracle::Mat full = oracle::full_hamiltonian(to_oracle(s));
      const double e0 = full(0, 0).real();
      CHECK(s.ground_state_energy() == doctest::Approx(e0).epsilon(1e-14));
      for (int n = 0; n <= L; ++n) {
        const oracle::Mat ref = oracle::sector_block(full, L, n);
        CHECK(max_entry_diff(build_static(s, n, EnergyReference::raw), ref) <= 1e-12);
        const oracle::Mat shifted = ref - e0 * oracle::Mat::Identity(ref.rows(), ref.cols());
        CHECK(max_entry_diff(build_static(s, n), shifted) <= 1e-12);
      }
    }
  }
}

TEST_CASE("diagonal energies follow the excitation and bond counting rule") {
  const ChainSpec s = chain(10, 40.0, {{5, 10.0}});
  const double e1 = s.single_excitation_energy();
  const auto h = build_static(s, 2);
  const auto& b = *h.basis;
  CHECK(h.entries(b.index_of(Configuration::from_sites({1, 3}, 10)), b.index_of(Configuration::from_sites({1, 3}, 10))) ==
        doctest::Approx(2 * e1));
  CHECK(h.entries(b.index_of(Configuration::from_sites({1, 2}, 10)), b.index_of(Configuration::from_sites({1, 2}, 10))) ==
        doctest::Approx(2 * e1 + 40.0));
  CHECK(h.entries(b.index_of(Configuration::from_sites({4, 5}, 10)), b.index_of(Configuration::from_sites({4, 5}, 10))) ==
        doctest::Approx(2 * e1 + 50.0));
  CHECK(h.entries(b.index_of(Configuration::from_sites({1, 2}, 10)), b.index_of(Configuration::from_sites({1, 3}, 10))) ==
        doctest::Approx(0.5));
}

TEST_CASE("level spacing only shifts a sector uniformly") {
  ChainSpec a = chain(6, 2.0, {{2, 4.0}});
  ChainSpec b = a;
  b.level_spacing = 37.0;
  for (int n = 0; n <= 6; ++n) {
    const auto ha = build_static(a, n);
    const auto hb = build_static(b, n);
    const Eigen::MatrixXd diff = ha.entries - hb.entries;
    const double shift = n * (a.level_spacing - b.level_spacing);
    CHECK((diff - shift * Eigen::MatrixXd::Identity(diff.rows(), diff.cols())).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("empty sector sits at zero energy") {
  const auto h = build_static(chain(8, 3.0, {{1, 10.0}}), 0);
  REQUIRE(h.entries.rows() == 1);
  CHECK(h.entries(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("detuning adds to excited sites only after its start") {
  const ChainSpec s = chain(5, 0.0, {{1, 10.0}});
  const DetuningSchedule sched{{2, DetuningShape::linear, 3.0, 1.0}, {4, DetuningShape::quadratic, 2.0, 0.5}};
  const auto h0 = build_static(s, 2);
  const auto ht = build_at_time(s, sched, 2, 2.0);
  const auto& b = *h0.basis;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double expected = (b[i].excited(2) ? 3.0 : 0.0) + (b[i].excited(4) ? 2.0 * 2.25 : 0.0);
    CHECK(ht.entries(i, i) - h0.entries(i, i) == doctest::Approx(expected));
  }
  CHECK(build_at_time(s, sched, 2, 0.25).entries.isApprox(h0.entries));
  CHECK_THROWS_AS(build_at_time(s, sched, 2, -1.0), DomainError);
  CHECK_THROWS_AS(validate_schedule({{9, DetuningShape::linear, 1.0, 0.0}}, 5), DomainError);
}

TEST_CASE("defect block is the single-excitation restriction") {
  const ChainSpec s = chain(8, 0.0, {{1, 10.0}, {2, 10.0}, {3, 10.0}});
  const int sites[] = {1, 2, 3};
  const auto blk = defect_block(s, sites);
  const double e = s.single_excitation_energy() + 10.0;
  Eigen::Matrix3d ref;
  ref << e, 0.5, 0, 0.5, e, 0.5, 0, 0.5, e;
  CHECK((blk.entries - ref).cwiseAbs().maxCoeff() <= 1e-12);
  const int bad[] = {1, 4};
  CHECK_THROWS_AS(defect_block(s, bad), DomainError);
  const ChainSpec unequal = chain(8, 0.0, {{1, 10.0}, {2, 12.0}});
  const int pair[] = {1, 2};
  CHECK_THROWS_AS(defect_block(unequal, pair), DomainError);
}

TEST_CASE("invalid chains are rejected and weak separation warns") {
  CHECK_THROWS_AS(build_static(chain(1), 0), DomainError);
  CHECK_THROWS_AS(build_static(chain(4, -1.0), 1), DomainError);
  CHECK_THROWS_AS(build_static(chain(4, 0.0, {{5, 1.0}}), 1), DomainError);
  CHECK_THROWS_AS(build_static(chain(4, 0.0, {{2, -1.0}}), 1), DomainError);
  ChainSpec weak = chain(4, 0.0, {{2, 50.0}});
  weak.level_spacing = 100.0;
  CHECK_FALSE(weak.regime_warnings().empty());
  CHECK(chain(4, 0.0, {{2, 10.0}}).regime_warnings().empty());
}
