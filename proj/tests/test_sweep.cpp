#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "magictrap/sweep.hpp"

using namespace magictrap;
using Catch::Matchers::WithinAbs;

namespace {

HalfInteger half(int twice_value) { return HalfInteger::from_twice(twice_value); }

Scenario small_scenario() {
  Scenario sc;
  sc.molecule.name = "23Na40K";
  sc.molecule.b_rot_mhz = 2821.7297;
  sc.molecule.dipole_ea0 = 1.07;
  sc.molecule.spin_a = half(3);
  sc.molecule.spin_b = HalfInteger(4);
  sc.molecule.eqq_a_mhz = -0.187;
  sc.molecule.eqq_b_mhz = 0.899;
  sc.molecule.g_a = 1.477388;
  sc.molecule.g_b = -0.32406;
  sc.molecule.dispersion.terms_parallel = {{495.192, 13322.2}, {21.3802, 19813.6}};
  sc.molecule.dispersion.terms_perpendicular = {{228.684, 17683.6},
                                                {34.6618, 21595.1}};
  sc.n_max = 1;
  sc.geometry.e_dir = Eigen::Vector3d(1, 0, 0);
  return sc;
}

std::string csv_of(const SweepResult& r) {
  std::ostringstream out;
  emit_csv(r, out, /*timestamp=*/false);
  return out.str();
}

}  // namespace

TEST_CASE("parse_grid") {
  const auto g = parse_grid("0:90:10");
  REQUIRE(g.size() == 10);
  REQUIRE(g.front() == 0.0);
  REQUIRE(g.back() == 90.0);
  REQUIRE(parse_grid("5:5:1") == std::vector<double>{5.0});
  REQUIRE_THROWS_AS(parse_grid("1:2"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_grid("1:2:0"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_grid("abc"), std::invalid_argument);
}

TEST_CASE("sweep rows, tracking and row count") {
  const Scenario sc = small_scenario();
  const auto grid = parse_grid("0:0.4:5");
  const auto result = run_sweep(sc, SweepAxis::EField, grid, 1, 0);
  REQUIRE(result.states_per_point == 144);
  REQUIRE(result.rows.size() == grid.size() * 144);
  // slots stay 0..K-1 at every point, energies finite
  for (size_t p = 0; p < grid.size(); ++p)
    for (int s = 0; s < 144; ++s) {
      const auto& row = result.rows[p * 144 + static_cast<size_t>(s)];
      REQUIRE(row.slot == s);
      REQUIRE(std::isfinite(row.energy_mhz));
      REQUIRE(std::isfinite(row.alpha_au));
    }
}

TEST_CASE("psi and bz sweep axes") {
  Scenario sc = small_scenario();
  sc.geometry.e_kvcm = 1.0;
  const auto psi = run_sweep(sc, SweepAxis::Psi, parse_grid("0:90:3"), 1, 4);
  REQUIRE(psi.axis == "psi_m_deg");
  REQUIRE(psi.rows.size() == 12);
  // psi = 0 aligns the polarization with the field axis: the N=1-like slots
  // see a larger light shift than at psi = 90 (P2 flips sign)
  REQUIRE(psi.rows[3].alpha_au > psi.rows[2 * 4 + 3].alpha_au);

  const auto bz = run_sweep(sc, SweepAxis::BField, parse_grid("1:9:2"), 1, 4);
  REQUIRE(bz.axis == "b_mt");
  REQUIRE(bz.rows.size() == 8);
  // Zeeman scale shifts energies between the two field values
  REQUIRE(bz.rows[0].energy_mhz != bz.rows[4].energy_mhz);
}

TEST_CASE("sweeps are deterministic and independent of the worker count") {
  const Scenario sc = small_scenario();
  const auto grid = parse_grid("0:0.2:4");
  const auto serial = run_sweep(sc, SweepAxis::EField, grid, 1, 20);
  const auto parallel = run_sweep(sc, SweepAxis::EField, grid, 2, 20);
  REQUIRE(csv_of(serial) == csv_of(parallel));

  const auto again = run_sweep(sc, SweepAxis::EField, grid, 1, 20);
  REQUIRE(csv_of(serial) == csv_of(again));
}

TEST_CASE("emit_csv round-trips the numeric content") {
  const Scenario sc = small_scenario();
  const auto result = run_sweep(sc, SweepAxis::Theta, parse_grid("0:90:3"), 1, 8);
  const std::string text = csv_of(result);

  // re-parse data lines
  std::istringstream in(text);
  std::string line;
  size_t row = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!seen_header) {
      REQUIRE(line ==
              "theta_deg,slot,energy_mhz,lambda,m_abs,fidelity,mixed,alpha_au");
      seen_header = true;
      continue;
    }
    double axis, energy, fid, alpha;
    int slot, lambda, m_abs, mixed;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%d,%lf,%d,%d,%lf,%d,%lf", &axis,
                        &slot, &energy, &lambda, &m_abs, &fid, &mixed,
                        &alpha) == 8);
    const auto& want = result.rows[row];
    REQUIRE_THAT(axis, WithinAbs(want.axis_value, 1e-9));
    REQUIRE(slot == want.slot);
    REQUIRE(std::abs(energy - want.energy_mhz) <=
            1e-11 * std::max(1.0, std::abs(want.energy_mhz)));
    REQUIRE(std::abs(alpha - want.alpha_au) <=
            1e-11 * std::max(1.0, std::abs(want.alpha_au)));
    ++row;
  }
  REQUIRE(row == result.rows.size());
}

TEST_CASE("empty grid emits provenance and header only") {
  const Scenario sc = small_scenario();
  const auto result = run_sweep(sc, SweepAxis::EField, {}, 1, 0);
  const std::string text = csv_of(result);
  std::istringstream in(text);
  std::string line;
  int data_lines = 0, comment_lines = 0, header_lines = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') ++comment_lines;
    else if (line.find("slot,") != std::string::npos) ++header_lines;
    else ++data_lines;
  }
  REQUIRE(comment_lines > 0);
  REQUIRE(header_lines == 1);
  REQUIRE(data_lines == 0);
}

TEST_CASE("every CSV header line names its units") {
  const Scenario sc = small_scenario();
  const auto result = run_sweep(sc, SweepAxis::EField, parse_grid("0:0.1:2"), 1, 4);
  const std::string text = csv_of(result);
  for (const char* unit : {"h*MHz", "(e a0)^2/E_h", "kV/cm", "mT", "kW/cm^2", "deg"})
    REQUIRE(text.find(unit) != std::string::npos);
}

TEST_CASE("figure recipes enumerate the right panels") {
  const Scenario sc = small_scenario();
  REQUIRE(figure_recipe("fig2", sc).size() == 1);
  REQUIRE(figure_recipe("fig3", sc).size() == 6);
  REQUIRE(figure_recipe("fig4", sc).size() == 3);
  REQUIRE(figure_recipe("fig5", sc).size() == 11);
  REQUIRE(figure_recipe("fig6", sc).size() == 4);
  REQUIRE_THROWS_AS(figure_recipe("fig7", sc), std::invalid_argument);

  // fig2 is laser-free; fig4 fields are the published ones
  REQUIRE(figure_recipe("fig2", sc)[0].scenario.geometry.intensity_kw_cm2 == 0.0);
  const auto fig4 = figure_recipe("fig4", sc);
  REQUIRE(fig4[0].scenario.geometry.e_kvcm == 2.0);
  REQUIRE(fig4[1].scenario.geometry.e_kvcm == 5.265);
  REQUIRE(fig4[2].scenario.geometry.e_kvcm == 8.0);
}
