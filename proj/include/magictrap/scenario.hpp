#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "magictrap/hamiltonian.hpp"
#include "magictrap/molecule.hpp"
#include "magictrap/pendular.hpp"
#include "magictrap/spectrum.hpp"

namespace magictrap {

/// Complete description of one computation: molecule, fields, basis size and
/// solver knobs.
struct Scenario {
  MoleculeParams molecule;
  FieldGeometry geometry;
  int n_max = 5;
  double fidelity_threshold = 0.5;
  double cluster_gap_mhz = 1e-6;
  bool pure_rotor = false;  // strip nuclear spins, quadrupole and Zeeman

  HalfInteger spin_a() const {
    return pure_rotor ? HalfInteger(0) : molecule.spin_a;
  }
  HalfInteger spin_b() const {
    return pure_rotor ? HalfInteger(0) : molecule.spin_b;
  }

  /// Lowest states carried through sweeps and classification: the N <= 1
  /// pendular manifolds (4 rotor states times the hyperfine multiplicity).
  int default_track_count() const {
    const int mult = pure_rotor ? 1 : molecule.spin_multiplicity();
    const int dim = (n_max + 1) * (n_max + 1) * mult;
    return std::min(dim, 4 * mult);
  }
};

/// Eigensolution of the full Hamiltonian at one field point, with the
/// per-intensity operator and pendular references kept for downstream
/// labeling and derivative work.
struct PointSolution {
  Spectrum spectrum;
  OperatorMatrix w;  // h*MHz per kW/cm^2
  std::vector<PendularState> pendular_refs;
  double alpha_par_au = 0.0;
  double alpha_perp_au = 0.0;
  double psi_m_deg = 0.0;
  double theta_deg = 0.0;
};

/// Builds and diagonalizes H = H_rot + H_hf + H_Z + H_E + I_trap W in the
/// frame whose quantization axis follows the electric field.
inline PointSolution evaluate_point(const Scenario& sc) {
  sc.geometry.validate();
  const Frame frame = sc.geometry.quantization_frame();
  const SphericalVector b_hat =
      spherical_components(frame.to_frame(sc.geometry.b_dir.normalized()));
  const SphericalVector eps =
      spherical_components(frame.to_frame(sc.geometry.pol_dir.normalized()));
  const PolarizationTensor pol = polarization_tensor(eps);

  const double nu = 1.0e7 / sc.geometry.wavelength_nm;
  const auto [alpha_par, alpha_perp] =
      alpha_dispersion(sc.molecule.dispersion, nu);

  auto basis = build_basis(sc.n_max, sc.spin_a(), sc.spin_b());

  OperatorMatrix h = h_rot(basis, sc.molecule.b_rot_mhz);
  if (!sc.pure_rotor) {
    if (sc.molecule.eqq_a_mhz != 0.0 || sc.molecule.eqq_b_mhz != 0.0)
      h.mat += h_quadrupole(basis, sc.molecule.eqq_a_mhz, sc.molecule.eqq_b_mhz,
                            sc.molecule.spin_a, sc.molecule.spin_b)
                   .mat;
    if (sc.geometry.b_mt != 0.0)
      h.mat += h_zeeman(basis, sc.molecule.g_a, sc.molecule.g_b, b_hat,
                        sc.geometry.b_mt)
                   .mat;
  }
  if (sc.geometry.e_kvcm != 0.0)
    h.mat += h_stark(basis, sc.molecule.dipole_ea0, sc.geometry.e_kvcm).mat;

  PointSolution out;
  out.w = h_pol_operator(basis, alpha_par, alpha_perp, pol);
  if (sc.geometry.intensity_kw_cm2 != 0.0)
    h.mat += sc.geometry.intensity_kw_cm2 * out.w.mat;

  out.spectrum = eigensolve(h);
  out.pendular_refs = pendular_spectrum(
      sc.n_max + 3, sc.molecule.b_rot_mhz,
      stark_energy_scale(sc.molecule.dipole_ea0, sc.geometry.e_kvcm));
  out.alpha_par_au = alpha_par;
  out.alpha_perp_au = alpha_perp;
  out.psi_m_deg = sc.geometry.psi_m_deg();
  out.theta_deg = sc.geometry.theta_deg();
  return out;
}

/// Pendular labels plus dynamic polarizability for chosen eigenstates.
inline std::vector<LabeledState> label_states(const PointSolution& sol,
                                              const Scenario& sc,
                                              const std::vector<int>& indices) {
  std::vector<LabeledState> labels =
      classify(sol.spectrum, sol.pendular_refs, indices, sc.fidelity_threshold);
  const Eigen::VectorXd alpha = dynamic_polarizability_subset(
      sol.spectrum, sol.w, indices, sc.cluster_gap_mhz);
  for (size_t i = 0; i < labels.size(); ++i) {
    labels[i].alpha_mhz_per_kw_cm2 = alpha(static_cast<Eigen::Index>(i));
    labels[i].alpha_au =
        alpha(static_cast<Eigen::Index>(i)) / units::kAuPolToMhzPerKwCm2;
  }
  return labels;
}

inline std::vector<int> lowest_indices(int count) {
  std::vector<int> idx(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) idx[static_cast<size_t>(i)] = i;
  return idx;
}

/// Labeled solution of the lowest default_track_count() states.
inline std::vector<LabeledState> evaluate_labeled(const Scenario& sc,
                                                  PointSolution* solution_out = nullptr) {
  PointSolution sol = evaluate_point(sc);
  auto labels = label_states(sol, sc, lowest_indices(sc.default_track_count()));
  if (solution_out != nullptr) *solution_out = std::move(sol);
  return labels;
}

/// Hyperpolarizability beta_i = d alpha_dyn,i / d I_trap by central
/// difference with adiabatic tracking across I - dI, I, I + dI. Input states
/// are eigenstate indices at the central intensity; the result is in
/// h*Hz per (kW/cm^2)^2.
inline Eigen::VectorXd hyperpolarizability(const Scenario& scenario,
                                           const std::vector<int>& states,
                                           double intensity_kw_cm2,
                                           double d_intensity_kw_cm2) {
  if (d_intensity_kw_cm2 <= 0.0)
    throw std::invalid_argument("hyperpolarizability: dI must be > 0");
  if (intensity_kw_cm2 - d_intensity_kw_cm2 < 0.0)
    throw std::invalid_argument("hyperpolarizability: I - dI must be >= 0");

  Scenario center = scenario;
  center.geometry.intensity_kw_cm2 = intensity_kw_cm2;
  Scenario minus = center, plus = center;
  minus.geometry.intensity_kw_cm2 = intensity_kw_cm2 - d_intensity_kw_cm2;
  plus.geometry.intensity_kw_cm2 = intensity_kw_cm2 + d_intensity_kw_cm2;

  const PointSolution sol_center = evaluate_point(center);
  const PointSolution sol_minus = evaluate_point(minus);
  const PointSolution sol_plus = evaluate_point(plus);

  const TrackResult to_minus = track_subset(sol_center.spectrum, states, sol_minus.spectrum);
  const TrackResult to_plus = track_subset(sol_center.spectrum, states, sol_plus.spectrum);
  for (size_t i = 0; i < states.size(); ++i) {
    if (to_minus.fidelity[i] < 0.5 || to_plus.fidelity[i] < 0.5)
      throw std::runtime_error(
          "hyperpolarizability: state tracking ambiguous (overlap < 0.5); "
          "reduce the intensity step dI");
  }

  std::vector<int> idx_minus(states.size()), idx_plus(states.size());
  for (size_t i = 0; i < states.size(); ++i) {
    idx_minus[i] = to_minus.permutation[i];
    idx_plus[i] = to_plus.permutation[i];
  }
  const Eigen::VectorXd alpha_minus = dynamic_polarizability_subset(
      sol_minus.spectrum, sol_minus.w, idx_minus, scenario.cluster_gap_mhz);
  const Eigen::VectorXd alpha_plus = dynamic_polarizability_subset(
      sol_plus.spectrum, sol_plus.w, idx_plus, scenario.cluster_gap_mhz);

  // alpha is in h*MHz/(kW/cm^2); 1e6 converts the derivative to h*Hz/(kW/cm^2)^2
  return (alpha_plus - alpha_minus) * (1.0e6 / (2.0 * d_intensity_kw_cm2));
}

}  // namespace magictrap
