#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "magictrap/hamiltonian.hpp"
#include "oracle_helpers.hpp"

using namespace magictrap;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

HalfInteger half(int twice_value) { return HalfInteger::from_twice(twice_value); }

MoleculeParams nak_params() {
  MoleculeParams p;
  p.name = "23Na40K";
  p.b_rot_mhz = 2821.7297;
  p.dipole_ea0 = 1.07;
  p.spin_a = half(3);
  p.spin_b = HalfInteger(4);
  p.eqq_a_mhz = -0.187;
  p.eqq_b_mhz = 0.899;
  p.g_a = 1.477388;
  p.g_b = -0.32406;
  p.dispersion.terms_parallel = {{495.192, 13322.2}, {21.3802, 19813.6}};
  p.dispersion.terms_perpendicular = {{228.684, 17683.6}, {34.6618, 21595.1}};
  return p;
}

int total_m_twice(const BasisState& s) {
  return s.m.twice() + s.m_a.twice() + s.m_b.twice();
}

}  // namespace

TEST_CASE("build_basis sizes and ordering") {
  const auto b = build_basis(5, half(3), HalfInteger(4));
  REQUIRE(b->size() == 1296);
  REQUIRE(build_basis(1, half(3), HalfInteger(4))->size() == 144);
  REQUIRE(build_basis(0, HalfInteger(0), HalfInteger(0))->size() == 1);

  // index_of agrees with the stored ordering
  for (int i = 0; i < b->size(); ++i) {
    const BasisState& s = b->state(i);
    REQUIRE(b->index_of(s.n.as_int(), s.m.as_int(), s.m_a, s.m_b) == i);
  }
  REQUIRE(b->index_of(6, 0, half(3), HalfInteger(0)) == -1);
  REQUIRE(b->index_of(1, 2, half(3), HalfInteger(0)) == -1);
}

TEST_CASE("basis size formula over spins and n_max") {
  for (int n_max = 0; n_max <= 6; ++n_max)
    for (int ta = 0; ta <= 9; ++ta)
      for (int tb = 0; tb <= 9; ++tb) {
        const auto b = build_basis(n_max, half(ta), half(tb));
        REQUIRE(b->size() == (n_max + 1) * (n_max + 1) * (ta + 1) * (tb + 1));
      }
}

TEST_CASE("h_rot diagonal") {
  const auto basis = build_basis(2, half(3), HalfInteger(4));
  const auto h = h_rot(basis, 2821.7297);
  const int i0 = basis->index_of(0, 0, half(3), HalfInteger(4));
  const int i1 = basis->index_of(1, 0, half(3), HalfInteger(4));
  const int i2 = basis->index_of(2, 1, half(3), HalfInteger(4));
  REQUIRE(h.mat(i0, i0).real() == 0.0);
  REQUIRE_THAT(h.mat(i1, i1).real(), WithinAbs(5643.4594, 1e-9));
  REQUIRE_THAT(h.mat(i2, i2).real(), WithinAbs(16930.3782, 1e-9));
  REQUIRE(h.hermiticity_error() == 0.0);
}

TEST_CASE("h_stark structure and values") {
  const auto basis = build_basis(2, half(3), HalfInteger(4));

  const auto zero = h_stark(basis, 1.07, 0.0);
  REQUIRE(zero.mat.cwiseAbs().maxCoeff() == 0.0);

  const auto h = h_stark(basis, 1.07, 1.0);
  const int i00 = basis->index_of(0, 0, half(3), HalfInteger(4));
  const int i10 = basis->index_of(1, 0, half(3), HalfInteger(4));
  const int i11 = basis->index_of(1, 1, half(3), HalfInteger(4));
  REQUIRE_THAT(h.mat(i00, i10).real(), WithinRel(-790.45, 1e-4));
  // E-frame selection rule: no Delta m coupling
  REQUIRE(std::abs(h.mat(i00, i11)) == 0.0);
  REQUIRE(h.hermiticity_error() < 1e-12 * 790.0);

  // couples only Delta N = +-1 with identical projections
  for (int i = 0; i < basis->size(); ++i)
    for (int j = 0; j < basis->size(); ++j) {
      if (std::abs(h.mat(i, j)) == 0.0) continue;
      const BasisState& a = basis->state(i);
      const BasisState& c = basis->state(j);
      REQUIRE(std::abs(a.n.as_int() - c.n.as_int()) == 1);
      REQUIRE(a.m.twice() == c.m.twice());
      REQUIRE(a.m_a.twice() == c.m_a.twice());
      REQUIRE(a.m_b.twice() == c.m_b.twice());
    }
}

TEST_CASE("h_quadrupole trivial zeros") {
  const auto basis = build_basis(1, half(3), HalfInteger(4));
  const auto zero = h_quadrupole(basis, 0.0, 0.0, half(3), HalfInteger(4));
  REQUIRE(zero.mat.cwiseAbs().maxCoeff() == 0.0);

  const auto h = h_quadrupole(basis, -0.187, 0.899, half(3), HalfInteger(4));
  // N=0 x N=0 block vanishes
  for (int i = 0; i < 36; ++i)
    for (int j = 0; j < 36; ++j) REQUIRE(std::abs(h.mat(i, j)) == 0.0);
  REQUIRE(h.hermiticity_error() < 1e-14);

  // conserves m + m_a + m_b
  for (int i = 0; i < basis->size(); ++i)
    for (int j = 0; j < basis->size(); ++j)
      if (std::abs(h.mat(i, j)) > 0.0)
        REQUIRE(total_m_twice(basis->state(i)) == total_m_twice(basis->state(j)));
}

TEST_CASE("h_quadrupole frozen elements (ladder-matrix oracle values)") {
  // values computed with an independent explicit-matrix construction
  const auto basis = build_basis(2, half(3), HalfInteger(4));

  const auto hk = h_quadrupole(basis, 0.0, 0.899, half(3), HalfInteger(4));
  const int a1 = basis->index_of(1, 0, half(3), HalfInteger(3));
  const int b1 = basis->index_of(1, 1, half(3), HalfInteger(2));
  REQUIRE_THAT(hk.mat(a1, b1).real(), WithinAbs(-6.371063648162e-02, 1e-12));

  const int a2 = basis->index_of(1, 1, half(-1), HalfInteger(4));
  REQUIRE_THAT(hk.mat(a2, a2).real(), WithinAbs(-4.495e-02, 1e-12));  // -eqQ/20

  const int a3 = basis->index_of(1, 0, half(1), HalfInteger(2));
  const int b3 = basis->index_of(1, -1, half(1), HalfInteger(3));
  REQUIRE_THAT(hk.mat(a3, b3).real(), WithinAbs(+6.371063648162e-02, 1e-12));

  const int a4 = basis->index_of(0, 0, half(3), HalfInteger(1));
  const int b4 = basis->index_of(2, 1, half(3), HalfInteger(0));
  REQUIRE_THAT(hk.mat(a4, b4).real(), WithinAbs(-1.966152927466e-02, 1e-12));

  const auto hna = h_quadrupole(basis, -0.187, 0.0, half(3), HalfInteger(4));
  const int a5 = basis->index_of(1, 1, half(3), HalfInteger(-4));
  REQUIRE_THAT(hna.mat(a5, a5).real(), WithinAbs(9.35e-03, 1e-12));  // -eqQ/20
}

TEST_CASE("h_quadrupole matches the explicit-matrix oracle in full") {
  // single nucleus so the oracle kron layout matches the basis ordering
  SECTION("I = 4 nucleus") {
    const auto basis = build_basis(2, HalfInteger(0), HalfInteger(4));
    const auto h = h_quadrupole(basis, 0.0, 0.899, HalfInteger(0), HalfInteger(4));
    const Eigen::MatrixXd want =
        oracle::quadrupole_single_nucleus(2, HalfInteger(4), 0.899);
    REQUIRE((h.mat.real() - want).cwiseAbs().maxCoeff() < 1e-13);
    REQUIRE(h.mat.imag().cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("I = 3/2 nucleus") {
    const auto basis = build_basis(2, half(3), HalfInteger(0));
    const auto h = h_quadrupole(basis, -0.187, 0.0, half(3), HalfInteger(0));
    const Eigen::MatrixXd want =
        oracle::quadrupole_single_nucleus(2, half(3), -0.187);
    REQUIRE((h.mat.real() - want).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("h_zeeman values and structure") {
  const auto basis = build_basis(1, half(3), HalfInteger(4));

  const auto zero = h_zeeman(basis, 0.0, 0.0,
                             spherical_components(Eigen::Vector3d(0, 0, 1)), 8.57);
  REQUIRE(zero.mat.cwiseAbs().maxCoeff() == 0.0);

  SECTION("field along the frame axis is diagonal") {
    const auto h = h_zeeman(basis, 1.477388, 0.0,
                            spherical_components(Eigen::Vector3d(0, 0, 1)), 8.57);
    const int i = basis->index_of(0, 0, half(3), HalfInteger(0));
    REQUIRE_THAT(h.mat(i, i).real(), WithinRel(-0.14478, 1e-4));
    REQUIRE((h.mat - Eigen::MatrixXcd(h.mat.diagonal().asDiagonal()))
                .cwiseAbs()
                .maxCoeff() == 0.0);
  }

  SECTION("perpendicular field only flips m_a by one") {
    const auto h = h_zeeman(basis, 1.477388, 0.0,
                            spherical_components(Eigen::Vector3d(1, 0, 0)), 8.57);
    REQUIRE(h.mat.diagonal().cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < basis->size(); ++i)
      for (int j = 0; j < basis->size(); ++j)
        if (std::abs(h.mat(i, j)) > 0.0) {
          REQUIRE(std::abs(basis->state(i).m_a.twice() -
                           basis->state(j).m_a.twice()) == 2);
          REQUIRE(basis->state(i).m_b.twice() == basis->state(j).m_b.twice());
        }
    REQUIRE(h.hermiticity_error() < 1e-14);
  }

  SECTION("tilted field with azimuth gives a complex Hermitian matrix") {
    const Eigen::Vector3d dir = Eigen::Vector3d(0.3, 0.6, 0.9).normalized();
    const auto h = h_zeeman(basis, 1.477388, -0.32406,
                            spherical_components(dir), 8.57);
    REQUIRE(h.mat.imag().cwiseAbs().maxCoeff() > 0.0);
    REQUIRE(h.hermiticity_error() < 1e-14);
  }
}

TEST_CASE("h_pol_operator values") {
  const MoleculeParams p = nak_params();
  const auto basis = build_basis(1, half(3), HalfInteger(4));
  const auto [apar, aperp] = alpha_dispersion(p.dispersion, 1.0e7 / 1064.0);
  const double abar_conv = alpha_in_mhz_per_kw_cm2((apar + 2.0 * aperp) / 3.0);
  const double dalpha = apar - aperp;

  SECTION("polarization along the quantization axis") {
    const auto w = h_pol_operator(
        basis, apar, aperp,
        polarization_tensor(spherical_components(Eigen::Vector3d(0, 0, 1))));
    const int i00 = basis->index_of(0, 0, half(3), HalfInteger(4));
    REQUIRE_THAT(w.mat(i00, i00).real(), WithinRel(-0.027124, 1e-3));
    const int i10 = basis->index_of(1, 0, half(3), HalfInteger(4));
    const double want =
        -(abar_conv + alpha_in_mhz_per_kw_cm2((4.0 / 15.0) * dalpha));
    REQUIRE_THAT(w.mat(i10, i10).real(), WithinAbs(want, 1e-12));
    REQUIRE(w.hermiticity_error() < 1e-14);
  }

  SECTION("magic angle wipes out the q=0 anisotropy") {
    const double psi = 54.735610317245346 * std::numbers::pi / 180.0;
    const auto w = h_pol_operator(
        basis, apar, aperp,
        polarization_tensor(spherical_components(
            Eigen::Vector3d(std::sin(psi), 0.0, std::cos(psi)))));
    for (int m : {-1, 0, 1}) {
      const int i = basis->index_of(1, m, half(3), HalfInteger(4));
      REQUIRE_THAT(w.mat(i, i).real(), WithinAbs(-abar_conv, 1e-12));
    }
  }

  SECTION("polarization along the axis conserves m") {
    const auto w = h_pol_operator(
        basis, apar, aperp,
        polarization_tensor(spherical_components(Eigen::Vector3d(0, 0, 1))));
    for (int i = 0; i < basis->size(); ++i)
      for (int j = 0; j < basis->size(); ++j)
        if (std::abs(w.mat(i, j)) > 0.0)
          REQUIRE(basis->state(i).m.twice() == basis->state(j).m.twice());
  }

  SECTION("trace identity: anisotropic part is traceless") {
    const auto w = h_pol_operator(
        basis, apar, aperp,
        polarization_tensor(spherical_components(
            Eigen::Vector3d(0.3, 0.0, 1.0).normalized())));
    REQUIRE_THAT(w.mat.trace().real(), WithinRel(-abar_conv * basis->size(), 1e-12));
  }
}

TEST_CASE("assemble combines terms linearly in intensity") {
  const MoleculeParams p = nak_params();
  const auto basis = build_basis(1, half(3), HalfInteger(4));
  const auto rot = h_rot(basis, p.b_rot_mhz);
  const auto quad =
      h_quadrupole(basis, p.eqq_a_mhz, p.eqq_b_mhz, p.spin_a, p.spin_b);
  const auto [apar, aperp] = alpha_dispersion(p.dispersion, 1.0e7 / 1064.0);
  const auto w = h_pol_operator(
      basis, apar, aperp,
      polarization_tensor(spherical_components(Eigen::Vector3d(0, 0, 1))));

  const auto h1 = assemble({&rot, &quad}, &w, 1.0);
  const auto h2 = assemble({&rot, &quad}, &w, 2.0);
  const Eigen::MatrixXcd diff = h2.mat - h1.mat;
  // rounding scale is set by the rotational energies, ~1e4 h MHz
  REQUIRE((diff - w.mat).cwiseAbs().maxCoeff() < 1e-11);

  const auto h0 = assemble({&rot}, nullptr, 0.0);
  REQUIRE((h0.mat - rot.mat).cwiseAbs().maxCoeff() == 0.0);

  const auto small = build_basis(0, half(3), HalfInteger(4));
  const auto rot_small = h_rot(small, p.b_rot_mhz);
  REQUIRE_THROWS_AS(assemble({&rot, &rot_small}, nullptr, 0.0),
                    std::invalid_argument);
}

TEST_CASE("collinear fields conserve the total projection M") {
  const MoleculeParams p = nak_params();
  const auto basis = build_basis(1, half(3), HalfInteger(4));
  const auto rot = h_rot(basis, p.b_rot_mhz);
  const auto quad =
      h_quadrupole(basis, p.eqq_a_mhz, p.eqq_b_mhz, p.spin_a, p.spin_b);
  const auto zee = h_zeeman(basis, p.g_a, p.g_b,
                            spherical_components(Eigen::Vector3d(0, 0, 1)), 8.57);
  const auto stark = h_stark(basis, p.dipole_ea0, 2.0);
  const auto [apar, aperp] = alpha_dispersion(p.dispersion, 1.0e7 / 1064.0);
  const auto w = h_pol_operator(
      basis, apar, aperp,
      polarization_tensor(spherical_components(Eigen::Vector3d(0, 0, 1))));
  const auto h = assemble({&rot, &quad, &zee, &stark}, &w, 2.35);

  for (int i = 0; i < basis->size(); ++i)
    for (int j = 0; j < basis->size(); ++j)
      if (std::abs(h.mat(i, j)) > 0.0)
        REQUIRE(total_m_twice(basis->state(i)) == total_m_twice(basis->state(j)));
  REQUIRE(h.hermiticity_error() < 1e-12 * h.mat.cwiseAbs().maxCoeff());
}

TEST_CASE("every term is Hermitian for a random tilted geometry") {
  const MoleculeParams p = nak_params();
  const auto basis = build_basis(2, half(3), HalfInteger(4));
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    Eigen::Vector3d b(u(rng), u(rng), u(rng)), e(u(rng), u(rng), u(rng));
    b.normalize();
    e.normalize();
    const Frame frame = build_frame(e);
    const auto b_sph = spherical_components(frame.to_frame(b));
    const auto zee = h_zeeman(basis, p.g_a, p.g_b, b_sph, 8.57);
    REQUIRE(zee.hermiticity_error() < 1e-13);

    Eigen::Vector3d eps(u(rng), u(rng), u(rng));
    eps.normalize();
    const auto t = polarization_tensor(spherical_components(frame.to_frame(eps)));
    const auto [apar, aperp] = alpha_dispersion(p.dispersion, 1.0e7 / 1064.0);
    const auto w = h_pol_operator(basis, apar, aperp, t);
    REQUIRE(w.hermiticity_error() < 1e-14);
  }
}
