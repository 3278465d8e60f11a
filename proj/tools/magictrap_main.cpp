// magictrap: rotational-hyperfine spectra, dynamic polarizabilities and
// magic trapping conditions for 1Sigma polar molecules in combined static
// and optical fields.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "magictrap/magictrap.hpp"

namespace {

using namespace magictrap;

struct CommonOpts {
  std::string molecule_path;
  double bz_mt = 8.57;
  double e_kvcm = 0.0;
  std::string e_dir = "x";
  double theta_deg = 0.0;
  double intensity = 2.35;
  double wavelength_nm = 1064.0;
  int nmax = 5;
  std::string out;
  int jobs = 1;
  bool pure_rotor = false;
};

void attach_common(CLI::App* cmd, CommonOpts& o, bool molecule_required = true) {
  auto* mol = cmd->add_option("--molecule", o.molecule_path,
                              "molecule config file (sectioned key=value)");
  if (molecule_required) mol->required();
  cmd->add_option("--bz-mt", o.bz_mt, "magnetic field along lab z, mT");
  cmd->add_option("--e", o.e_kvcm, "static electric field, kV/cm");
  cmd->add_option("--e-dir", o.e_dir,
                  "electric field direction: x, z, or 'polar,azimuth' in deg");
  cmd->add_option("--theta", o.theta_deg,
                  "laser polarization angle from lab z, deg (in the xz plane)");
  cmd->add_option("--intensity", o.intensity, "trapping intensity, kW/cm^2");
  cmd->add_option("--wavelength-nm", o.wavelength_nm, "laser wavelength, nm");
  cmd->add_option("--nmax", o.nmax, "rotational basis cutoff N_max");
  cmd->add_option("--out", o.out, "output CSV path (default: stdout)");
  cmd->add_option("--jobs", o.jobs, "worker threads for sweep points");
  cmd->add_flag("--pure-rotor", o.pure_rotor,
                "drop nuclear spins, quadrupole and Zeeman terms");
}

Eigen::Vector3d parse_direction(const std::string& text) {
  if (text == "x") return {1.0, 0.0, 0.0};
  if (text == "z") return {0.0, 0.0, 1.0};
  double polar = 0.0, azimuth = 0.0;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%lf,%lf%c", &polar, &azimuth, &extra) != 2)
    throw CLI::ValidationError("--e-dir",
                               "expected x, z, or 'polar,azimuth' in degrees");
  const double p = polar * std::numbers::pi / 180.0;
  const double a = azimuth * std::numbers::pi / 180.0;
  return {std::sin(p) * std::cos(a), std::sin(p) * std::sin(a), std::cos(p)};
}

Scenario make_scenario(const CommonOpts& o) {
  std::ifstream in(o.molecule_path);
  if (!in)
    throw std::runtime_error("cannot read molecule file '" + o.molecule_path + "'");
  std::ostringstream text;
  text << in.rdbuf();

  Scenario sc;
  sc.molecule = parse_molecule_config(text.str());
  sc.n_max = o.nmax;
  sc.pure_rotor = o.pure_rotor;
  sc.geometry.b_mt = o.bz_mt;
  sc.geometry.b_dir = Eigen::Vector3d(0.0, 0.0, 1.0);
  sc.geometry.e_dir = parse_direction(o.e_dir);
  sc.geometry.e_kvcm = o.e_kvcm;
  sc.geometry.wavelength_nm = o.wavelength_nm;
  sc.geometry.intensity_kw_cm2 = o.intensity;
  sc.geometry.set_polarization_theta_deg(o.theta_deg);
  return sc;
}

void write_result(const SweepResult& result, const std::string& out) {
  if (out.empty()) {
    emit_csv(result, std::cout);
  } else {
    emit_csv(result, out);
    std::cerr << "wrote " << result.rows.size() << " rows to " << out << "\n";
  }
}

void print_magic_result(const char* kind, const MagicResult& r,
                        const char* unit) {
  std::printf("%s: %.6g %s\n", kind, r.root, unit);
  std::printf("  residual delta_alpha: %.4g a.u.\n", r.residual_au);
  std::printf("  bracket: [%g, %g], %d bisection iterations\n", r.bracket_lo,
              r.bracket_hi, r.iterations);
  std::printf("  theta (lab frame): %.4f deg\n", r.theta_report_deg);
  if (!r.validation.empty()) {
    std::printf("  validation (psi_m deg -> delta_alpha a.u.):\n");
    for (const auto& row : r.validation)
      std::printf("    %6.2f  %+.4g  %s\n", row.parameter, row.delta_alpha_au,
                  row.ok ? "ok" : "FAIL");
  }
  if (r.root_refined != r.root_coarse)
    std::printf("  n_max+1 refinement: %.6g\n", r.root_refined);
  if (r.convergence_warning)
    std::printf("  WARNING: root moved by more than 0.1%% under n_max+1; "
                "refined value reported\n");
}

int run_cli(int argc, char** argv) {
  CLI::App app{
      "magictrap: rotational-hyperfine levels, dynamic polarizabilities and "
      "magic trapping conditions of 1Sigma+ polar molecules"};
  app.require_subcommand(1);

  // levels
  CommonOpts lv;
  double lv_emin = 0.0, lv_emax = 1.2;
  int lv_points = 200, lv_states = 0;
  auto* levels = app.add_subcommand(
      "levels", "eigenenergies on an electric-field sweep");
  attach_common(levels, lv);
  levels->add_option("--e-min", lv_emin, "sweep start, kV/cm");
  levels->add_option("--e-max", lv_emax, "sweep end, kV/cm")->required();
  levels->add_option("--points", lv_points, "grid points");
  levels->add_option("--states", lv_states,
                     "tracked states (default: the N<=1 manifolds)");

  // alpha
  CommonOpts al;
  std::string al_theta, al_e, al_int;
  int al_states = 0;
  auto* alpha = app.add_subcommand(
      "alpha", "dynamic polarizabilities on a one-parameter sweep");
  attach_common(alpha, al);
  alpha->add_option("--theta-sweep", al_theta, "theta grid start:stop:count");
  alpha->add_option("--e-sweep", al_e, "E grid start:stop:count");
  alpha->add_option("--intensity-sweep", al_int, "I grid start:stop:count");
  alpha->add_option("--states", al_states, "tracked states");

  // sweep
  CommonOpts sw;
  std::string sw_axis, sw_range;
  int sw_states = 0;
  auto* sweep = app.add_subcommand("sweep", "generic one-axis sweep");
  attach_common(sweep, sw);
  sweep->add_option("--axis", sw_axis, "e | theta | psi | intensity | bz")
      ->required();
  sweep->add_option("--range", sw_range, "grid start:stop:count")->required();
  sweep->add_option("--states", sw_states, "tracked states");

  // pendular
  std::string pd_omega = "0:5:51";
  int pd_nmax = 8;
  std::string pd_out;
  auto* pendular = app.add_subcommand(
      "pendular", "reduced-unit pendular model tables (B = 1)");
  pendular->add_option("--omega-sweep", pd_omega,
                       "reduced field dE/B grid start:stop:count");
  pendular->add_option("--nmax", pd_nmax, "rotational cutoff");
  pendular->add_option("--out", pd_out, "output CSV path (default: stdout)");

  // magic-angle
  CommonOpts ma;
  std::string ma_bracket = "30:80";
  auto* magic_angle = app.add_subcommand(
      "magic-angle", "polarization angle where the m=0 manifold alphas cross");
  attach_common(magic_angle, ma);
  magic_angle->add_option("--bracket", ma_bracket, "psi_m bracket lo:hi, deg");

  // magic-field
  CommonOpts mf;
  double mf_psi = 90.0, mf_theta = -1.0;
  std::string mf_bracket = "3:8";
  bool mf_no_refine = false;
  auto* magic_field = app.add_subcommand(
      "magic-field", "electric field where the m=0 manifold alphas cross");
  attach_common(magic_field, mf);
  magic_field->add_option("--psi", mf_psi, "polarization angle from E, deg");
  magic_field->add_option("--theta-at", mf_theta,
                          "alternative: lab theta; converted to psi_m");
  magic_field->add_option("--bracket", mf_bracket, "E bracket lo:hi, kV/cm");
  magic_field->add_flag("--no-refine", mf_no_refine,
                        "skip the n_max+1 convergence refinement");

  // double-magic
  CommonOpts dm;
  auto* double_magic_cmd = app.add_subcommand(
      "double-magic", "simultaneous magic field and magic angle");
  attach_common(double_magic_cmd, dm);

  // figure
  CommonOpts fg;
  std::string fg_name, fg_prefix;
  auto* figure = app.add_subcommand(
      "figure", "named sweep recipes (fig2..fig6) reproducing the level and "
                "polarizability landscapes");
  attach_common(figure, fg);
  figure->add_option("name", fg_name, "fig2 | fig3 | fig4 | fig5 | fig6")
      ->required();
  figure->add_option("--out-prefix", fg_prefix,
                     "output file prefix (default: the figure name)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help text or the usage error
    return code == 0 ? 0 : 1;
  }

  if (*levels) {
    Scenario sc = make_scenario(lv);
    std::ostringstream grid;
    grid << lv_emin << ":" << lv_emax << ":" << lv_points;
    const auto result = run_sweep(sc, SweepAxis::EField, parse_grid(grid.str()),
                                  lv.jobs, lv_states);
    write_result(result, lv.out);
    return 0;
  }
  if (*alpha) {
    const int given = (!al_theta.empty()) + (!al_e.empty()) + (!al_int.empty());
    if (given != 1)
      throw CLI::ValidationError(
          "alpha", "give exactly one of --theta-sweep, --e-sweep, "
                   "--intensity-sweep");
    Scenario sc = make_scenario(al);
    SweepAxis axis = SweepAxis::Theta;
    std::string grid = al_theta;
    if (!al_e.empty()) {
      axis = SweepAxis::EField;
      grid = al_e;
    } else if (!al_int.empty()) {
      axis = SweepAxis::Intensity;
      grid = al_int;
    }
    const auto result =
        run_sweep(sc, axis, parse_grid(grid), al.jobs, al_states);
    write_result(result, al.out);
    return 0;
  }
  if (*sweep) {
    Scenario sc = make_scenario(sw);
    SweepAxis axis;
    if (sw_axis == "e") axis = SweepAxis::EField;
    else if (sw_axis == "theta") axis = SweepAxis::Theta;
    else if (sw_axis == "psi") axis = SweepAxis::Psi;
    else if (sw_axis == "intensity") axis = SweepAxis::Intensity;
    else if (sw_axis == "bz") axis = SweepAxis::BField;
    else
      throw CLI::ValidationError("--axis",
                                 "expected e, theta, psi, intensity or bz");
    const auto result =
        run_sweep(sc, axis, parse_grid(sw_range), sw.jobs, sw_states);
    write_result(result, sw.out);
    return 0;
  }
  if (*pendular) {
    const auto grid = parse_grid(pd_omega);
    std::ostringstream out;
    out << "# magictrap " << kToolVersion << "\n";
    out << "# pendular model, reduced units (B = 1)\n";
    out << "omega,lambda,m,energy_over_b,c20\n";
    char buf[160];
    for (const double omega : grid) {
      for (const auto& st : pendular_spectrum(pd_nmax, 1.0, omega)) {
        std::snprintf(buf, sizeof(buf), "%.12g,%d,%d,%.12g,%.12g\n", omega,
                      st.lambda, st.m, st.energy_over_b, pendular_c20(st));
        out << buf;
      }
    }
    if (pd_out.empty()) {
      std::cout << out.str();
    } else {
      std::ofstream f(pd_out);
      if (!f) throw std::runtime_error("cannot open '" + pd_out + "'");
      f << out.str();
    }
    return 0;
  }
  if (*magic_angle) {
    Scenario sc = make_scenario(ma);
    double lo = 0.0, hi = 0.0;
    if (std::sscanf(ma_bracket.c_str(), "%lf:%lf", &lo, &hi) != 2)
      throw CLI::ValidationError("--bracket", "expected lo:hi");
    const auto res = find_magic_angle(sc.geometry.e_kvcm, sc, lo, hi);
    print_magic_result("magic angle psi_m", res, "deg");
    return 0;
  }
  if (*magic_field) {
    Scenario sc = make_scenario(mf);
    double psi = mf_psi;
    if (mf_theta >= 0.0) {
      Scenario probe = sc;
      probe.geometry.e_kvcm = std::max(probe.geometry.e_kvcm, 1.0);
      probe.geometry.set_polarization_theta_deg(mf_theta);
      psi = probe.geometry.psi_m_deg();
      std::fprintf(stderr, "theta = %.4f deg corresponds to psi_m = %.4f deg\n",
                   mf_theta, psi);
    }
    double lo = 0.0, hi = 0.0;
    if (std::sscanf(mf_bracket.c_str(), "%lf:%lf", &lo, &hi) != 2)
      throw CLI::ValidationError("--bracket", "expected lo:hi");
    const auto res = find_magic_field(psi, sc, lo, hi, !mf_no_refine);
    print_magic_result("magic electric field", res, "kV/cm");
    return 0;
  }
  if (*double_magic_cmd) {
    Scenario sc = make_scenario(dm);
    const auto res = double_magic(sc);
    std::printf("double magic condition: E = %.6g kV/cm, psi_m = %.4f deg "
                "(theta = %.4f deg for this geometry)\n",
                res.e_kvcm, res.psi_m_deg, res.theta_deg);
    print_magic_result("  underlying field root", res.field, "kV/cm");
    std::printf("  angle scan at E* (psi_m deg -> delta_alpha a.u.):\n");
    for (const auto& row : res.angle_scan)
      std::printf("    %6.2f  %+.4g  %s\n", row.parameter, row.delta_alpha_au,
                  row.ok ? "ok" : "FAIL");
    std::printf("  field scan at psi* (E kV/cm -> delta_alpha a.u.):\n");
    for (const auto& row : res.field_scan)
      std::printf("    %6.2f  %+.4g  %s\n", row.parameter, row.delta_alpha_au,
                  row.ok ? "ok" : "FAIL");
    std::printf("double magic validation: %s\n", res.ok ? "ok" : "FAILED");
    return res.ok ? 0 : 2;
  }
  if (*figure) {
    Scenario sc = make_scenario(fg);
    const auto panels = figure_recipe(fg_name, sc);
    const std::string prefix = fg_prefix.empty() ? fg_name : fg_prefix;
    for (const auto& panel : panels) {
      const auto result =
          run_sweep(panel.scenario, panel.axis, panel.grid, fg.jobs, 0);
      const std::string path = prefix + "_" + panel.name + ".csv";
      emit_csv(result, path);
      std::cerr << "wrote " << path << "\n";
    }
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
