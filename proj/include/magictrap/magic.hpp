#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "magictrap/scenario.hpp"

namespace magictrap {

/// Magic polarization angle: P_2(cos psi) = 0.
inline constexpr double kMagicAngleDeg = 54.735610317245346;

/// Picks the hyperfine states of one pendular manifold out of a labeled set.
struct ManifoldSelector {
  int lambda = 0;
  int m_abs = 0;
  double min_fidelity = 0.5;

  bool matches(const LabeledState& s) const {
    return !s.mixed && s.lambda == lambda && s.m_abs == m_abs &&
           s.fidelity >= min_fidelity;
  }
};

/// Positions (into the labeled list) of the selected manifold states.
inline std::vector<int> select_manifold(const std::vector<LabeledState>& labels,
                                        const ManifoldSelector& sel) {
  std::vector<int> out;
  for (size_t i = 0; i < labels.size(); ++i)
    if (sel.matches(labels[i])) out.push_back(static_cast<int>(i));
  if (out.empty())
    throw std::runtime_error("empty manifold selection (lambda=" +
                             std::to_string(sel.lambda) + ", |m|=" +
                             std::to_string(sel.m_abs) + ")");
  return out;
}

struct AlphaStats {
  double mean_au = 0.0;
  double min_au = 0.0;
  double max_au = 0.0;
  double spread_rel = 0.0;  // (max - min) / |mean|
  int count = 0;
};

inline AlphaStats manifold_alpha_stats(const std::vector<LabeledState>& labels,
                                       const ManifoldSelector& sel) {
  const auto picked = select_manifold(labels, sel);
  AlphaStats st;
  st.count = static_cast<int>(picked.size());
  st.min_au = std::numeric_limits<double>::infinity();
  st.max_au = -std::numeric_limits<double>::infinity();
  for (const int i : picked) {
    const double a = labels[static_cast<size_t>(i)].alpha_au;
    st.mean_au += a;
    st.min_au = std::min(st.min_au, a);
    st.max_au = std::max(st.max_au, a);
  }
  st.mean_au /= st.count;
  st.spread_rel = (st.max_au - st.min_au) / std::abs(st.mean_au);
  return st;
}

/// Mean, min, max and relative spread of alpha_dyn over one manifold at the
/// scenario's field point.
inline AlphaStats manifold_alpha_stats(const Scenario& sc,
                                       const ManifoldSelector& sel) {
  return manifold_alpha_stats(evaluate_labeled(sc), sel);
}

/// Mean alpha of (lambda=1, m=0) minus mean alpha of (lambda=0, m=0), in
/// atomic units, at electric field e_kvcm and polarization angle psi_m from
/// the field axis.
inline double delta_alpha(double e_kvcm, double psi_m_deg, const Scenario& base) {
  Scenario sc = base;
  sc.geometry.e_kvcm = e_kvcm;
  sc.geometry.set_polarization_psi_deg(psi_m_deg);
  const PointSolution sol = evaluate_point(sc);
  const auto tracked = lowest_indices(sc.default_track_count());
  const auto labels = classify(sol.spectrum, sol.pendular_refs, tracked,
                               sc.fidelity_threshold);
  const double fid = sc.fidelity_threshold;
  const auto ground = select_manifold(labels, ManifoldSelector{0, 0, fid});
  const auto excited = select_manifold(labels, ManifoldSelector{1, 0, fid});

  std::vector<int> wanted;
  for (const int p : ground)
    wanted.push_back(labels[static_cast<size_t>(p)].index);
  for (const int p : excited)
    wanted.push_back(labels[static_cast<size_t>(p)].index);
  const Eigen::VectorXd alpha = dynamic_polarizability_subset(
      sol.spectrum, sol.w, wanted, sc.cluster_gap_mhz);

  double mean0 = 0.0, mean1 = 0.0;
  for (size_t k = 0; k < ground.size(); ++k) mean0 += alpha(static_cast<Eigen::Index>(k));
  for (size_t k = ground.size(); k < wanted.size(); ++k)
    mean1 += alpha(static_cast<Eigen::Index>(k));
  mean0 /= static_cast<double>(ground.size());
  mean1 /= static_cast<double>(excited.size());
  return (mean1 - mean0) / units::kAuPolToMhzPerKwCm2;
}

struct MagicValidationRow {
  double parameter;       // psi_m (deg) or E (kV/cm)
  double delta_alpha_au;
  bool ok;
};

struct MagicResult {
  double root = 0.0;             // kV/cm (field) or degrees psi_m (angle)
  double residual_au = 0.0;      // delta_alpha at the root
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int iterations = 0;
  double theta_report_deg = 0.0;  // lab-frame angle of the root geometry
  std::vector<MagicValidationRow> validation;
  bool validation_ok = true;
  // n_max + 1 refinement (field roots)
  double root_coarse = 0.0;
  double root_refined = 0.0;
  bool convergence_warning = false;
};

namespace detail {

struct Bisection {
  double root;
  double lo, hi;
  int iterations;
};

inline Bisection bisect(const std::function<double(double)>& f, double lo,
                        double hi, const char* what, int max_iter = 60,
                        double rel_width = 1e-4) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return {lo, lo, hi, 0};
  if (fhi == 0.0) return {hi, lo, hi, 0};
  if ((flo > 0.0) == (fhi > 0.0))
    throw std::runtime_error(std::string(what) +
                             ": no sign change across bracket [" +
                             std::to_string(lo) + ", " + std::to_string(hi) + "]");
  const double tol = rel_width * (hi - lo);
  int it = 0;
  while (hi - lo > tol && it < max_iter) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = f(mid);
    ++it;
    if (fmid == 0.0) return {mid, lo, hi, it};
    if ((flo > 0.0) == (fmid > 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return {0.5 * (lo + hi), lo, hi, it};
}

inline double p2_cos_deg(double angle_deg) {
  const double c = std::cos(angle_deg * std::numbers::pi / 180.0);
  return 0.5 * (3.0 * c * c - 1.0);
}

inline double theta_at(const Scenario& base, double e_kvcm, double psi_m_deg) {
  Scenario sc = base;
  sc.geometry.e_kvcm = e_kvcm;
  sc.geometry.set_polarization_psi_deg(psi_m_deg);
  return sc.geometry.theta_deg();
}

}  // namespace detail

/// Root of delta_alpha over the polarization angle psi_m at fixed field.
/// The root is reported both as psi_m and as the lab-frame angle theta of
/// the corresponding geometry.
inline MagicResult find_magic_angle(double e_kvcm, const Scenario& sc,
                                    double bracket_lo_deg = 30.0,
                                    double bracket_hi_deg = 80.0) {
  const auto f = [&](double psi) { return delta_alpha(e_kvcm, psi, sc); };
  const auto bis = detail::bisect(f, bracket_lo_deg, bracket_hi_deg,
                                  "find_magic_angle");
  MagicResult res;
  res.root = bis.root;
  res.root_coarse = bis.root;
  res.root_refined = bis.root;
  res.bracket_lo = bracket_lo_deg;
  res.bracket_hi = bracket_hi_deg;
  res.iterations = bis.iterations;
  res.residual_au = f(bis.root);
  res.validation.push_back({bis.root, res.residual_au,
                            std::abs(res.residual_au) < 0.1});
  res.validation_ok = res.validation.back().ok;
  res.theta_report_deg = detail::theta_at(sc, e_kvcm, bis.root);
  return res;
}

/// Root of delta_alpha over the electric field at fixed psi_m, with a
/// validation table over psi_m in {0, 30, 60, 90} degrees and an n_max + 1
/// refinement. If the refinement moves the root by more than 0.1% the
/// refined value is reported with a convergence warning.
inline MagicResult find_magic_field(double psi_m_deg, const Scenario& sc,
                                    double bracket_lo_kvcm = 3.0,
                                    double bracket_hi_kvcm = 8.0,
                                    bool refine_convergence = true) {
  if (std::abs(detail::p2_cos_deg(psi_m_deg)) < 0.02)
    throw std::invalid_argument(
        "find_magic_field: psi_m is at the magic angle, where delta_alpha "
        "vanishes identically and the field root is undefined");

  const auto f = [&](double e) { return delta_alpha(e, psi_m_deg, sc); };
  const auto bis = detail::bisect(f, bracket_lo_kvcm, bracket_hi_kvcm,
                                  "find_magic_field");
  MagicResult res;
  res.root = bis.root;
  res.root_coarse = bis.root;
  res.root_refined = bis.root;
  res.bracket_lo = bracket_lo_kvcm;
  res.bracket_hi = bracket_hi_kvcm;
  res.iterations = bis.iterations;
  res.residual_au = f(bis.root);
  res.theta_report_deg = detail::theta_at(sc, bis.root, psi_m_deg);

  res.validation_ok = true;
  for (const double psi : {0.0, 30.0, 60.0, 90.0}) {
    const double d = delta_alpha(bis.root, psi, sc);
    const bool ok = std::abs(d) < 0.5;
    res.validation.push_back({psi, d, ok});
    res.validation_ok = res.validation_ok && ok;
  }

  if (refine_convergence) {
    Scenario finer = sc;
    finer.n_max = sc.n_max + 1;
    const auto g = [&](double e) { return delta_alpha(e, psi_m_deg, finer); };
    double lo = bis.root * 0.995, hi = bis.root * 1.005;
    detail::Bisection fine{};
    try {
      // resolves moves well below the 0.1% reporting threshold
      fine = detail::bisect(g, lo, hi, "find_magic_field refinement", 60, 0.02);
    } catch (const std::runtime_error&) {
      // root moved outside the tight window; redo on the full bracket
      fine = detail::bisect(g, bracket_lo_kvcm, bracket_hi_kvcm,
                            "find_magic_field refinement");
    }
    res.root_refined = fine.root;
    if (std::abs(fine.root - bis.root) > 1e-3 * std::abs(bis.root)) {
      res.convergence_warning = true;
      res.root = fine.root;
      res.residual_au = g(fine.root);
    }
  }
  return res;
}

struct DoubleMagicResult {
  MagicResult field;       // magic field search at psi_m = 90 deg
  double e_kvcm = 0.0;     // reported magic field
  double psi_m_deg = 0.0;  // magic angle
  double theta_deg = 0.0;  // lab angle corresponding to psi_m at this geometry
  std::vector<MagicValidationRow> angle_scan;   // psi grid at E*
  std::vector<MagicValidationRow> field_scan;   // E grid at psi*
  bool ok = true;
};

/// Double magic condition: the field root (evaluated at psi_m = 90 deg)
/// combined with the magic angle, validated on psi and E grids. The
/// (lambda=1, |m|=1) manifold takes no part in any magic claim.
inline DoubleMagicResult double_magic(const Scenario& sc) {
  DoubleMagicResult out;
  out.field = find_magic_field(90.0, sc);
  out.e_kvcm = out.field.root;
  out.psi_m_deg = kMagicAngleDeg;
  out.theta_deg = detail::theta_at(sc, out.e_kvcm, kMagicAngleDeg);

  for (int psi = 0; psi <= 90; psi += 10) {
    const double d = delta_alpha(out.e_kvcm, psi, sc);
    const bool ok = std::abs(d) < 0.5;
    out.angle_scan.push_back({static_cast<double>(psi), d, ok});
    out.ok = out.ok && ok;
  }
  for (double e = 0.5; e <= 10.0 + 1e-9; e += 0.5) {
    const double d = delta_alpha(e, kMagicAngleDeg, sc);
    const bool ok = std::abs(d) < 0.5;
    out.field_scan.push_back({e, d, ok});
    out.ok = out.ok && ok;
  }
  return out;
}

}  // namespace magictrap
