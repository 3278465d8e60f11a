#pragma once

#include <atomic>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "magictrap/magic.hpp"
#include "magictrap/scenario.hpp"

namespace magictrap {

inline constexpr const char* kToolVersion = "0.1.0";

enum class SweepAxis { EField, Theta, Psi, Intensity, BField };

inline const char* axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::EField: return "e_kvcm";
    case SweepAxis::Theta: return "theta_deg";
    case SweepAxis::Psi: return "psi_m_deg";
    case SweepAxis::Intensity: return "intensity_kw_cm2";
    case SweepAxis::BField: return "b_mt";
  }
  return "?";
}

inline void apply_axis(Scenario& sc, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::EField:
      sc.geometry.e_kvcm = value;
      return;
    case SweepAxis::Theta:
      sc.geometry.set_polarization_theta_deg(value);
      return;
    case SweepAxis::Psi:
      sc.geometry.set_polarization_psi_deg(value);
      return;
    case SweepAxis::Intensity:
      sc.geometry.intensity_kw_cm2 = value;
      return;
    case SweepAxis::BField:
      sc.geometry.b_mt = value;
      return;
  }
}

/// Inclusive grid "start:stop:count".
inline std::vector<double> parse_grid(const std::string& text) {
  double start = 0.0, stop = 0.0;
  long count = 0;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%ld%c", &start, &stop, &count, &extra) != 3 ||
      count < 1)
    throw std::invalid_argument("bad grid '" + text +
                                "', expected start:stop:count with count >= 1");
  std::vector<double> grid(static_cast<size_t>(count));
  if (count == 1) {
    grid[0] = start;
    return grid;
  }
  for (long i = 0; i < count; ++i)
    grid[static_cast<size_t>(i)] = start + (stop - start) * double(i) / double(count - 1);
  return grid;
}

/// One emitted observation: a tracked state at a grid point.
struct SweepRow {
  double axis_value = 0.0;
  int slot = 0;  // tracked-state identity, assigned at the first grid point
  double energy_mhz = 0.0;
  int lambda = 0;
  int m_abs = 0;
  double fidelity = 0.0;
  int mixed = 0;
  double alpha_au = 0.0;
};

struct SweepResult {
  std::string axis;
  std::vector<double> grid;
  int states_per_point = 0;
  std::vector<std::string> provenance;  // emitted as '#' lines
  std::vector<SweepRow> rows;           // grid-major, slot-minor
};

namespace detail {

inline std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::vector<std::string> scenario_provenance(const Scenario& sc,
                                                    SweepAxis axis,
                                                    size_t points, int tracked) {
  const auto dir = [](const Eigen::Vector3d& v) {
    std::ostringstream o;
    o << fmt12(v.x()) << " " << fmt12(v.y()) << " " << fmt12(v.z());
    return o.str();
  };
  std::vector<std::string> p;
  p.push_back(std::string("magictrap ") + kToolVersion);
  p.push_back("molecule: " + sc.molecule.name);
  p.push_back("b_mt: " + fmt12(sc.geometry.b_mt) + "  b_dir: " + dir(sc.geometry.b_dir));
  p.push_back("e_kvcm: " + fmt12(sc.geometry.e_kvcm) + "  e_dir: " + dir(sc.geometry.e_dir));
  p.push_back("wavelength_nm: " + fmt12(sc.geometry.wavelength_nm) +
              "  intensity_kw_cm2: " + fmt12(sc.geometry.intensity_kw_cm2));
  p.push_back("theta_deg: " + fmt12(sc.geometry.theta_deg()) +
              "  psi_m_deg: " + fmt12(sc.geometry.psi_m_deg()));
  p.push_back("n_max: " + std::to_string(sc.n_max) +
              "  pure_rotor: " + (sc.pure_rotor ? "1" : "0") +
              "  fidelity_threshold: " + fmt12(sc.fidelity_threshold));
  p.push_back("axis: " + std::string(axis_name(axis)) +
              "  points: " + std::to_string(points) +
              "  tracked_states: " + std::to_string(tracked));
  p.push_back("units: energy h*MHz, alpha (e a0)^2/E_h, E kV/cm, B mT, "
              "I kW/cm^2, angles deg");
  return p;
}

}  // namespace detail

/// Runs a sweep over one axis. Points are evaluated independently (optionally
/// by a small worker pool); the adiabatic tracking pass runs in grid order
/// afterwards, so the output is identical for any worker count.
inline SweepResult run_sweep(const Scenario& base, SweepAxis axis,
                             const std::vector<double>& grid, int jobs = 1,
                             int track_count = 0) {
  if (grid.empty() || jobs < 1) {
    SweepResult empty;
    empty.axis = axis_name(axis);
    empty.provenance = detail::scenario_provenance(base, axis, 0, 0);
    return empty;
  }
  for (size_t i = 1; i < grid.size(); ++i)
    if (grid[i] <= grid[i - 1])
      throw std::invalid_argument("sweep grid must be strictly increasing");

  SweepResult result;
  result.axis = axis_name(axis);
  result.grid = grid;

  const int n_points = static_cast<int>(grid.size());
  const int chunk = std::max(1, jobs);

  // tracked-subset state carried between points
  Eigen::MatrixXcd prev_vectors;  // basis_dim x K
  int k_tracked = 0;

  for (int begin = 0; begin < n_points; begin += chunk) {
    const int end = std::min(n_points, begin + chunk);
    std::vector<std::unique_ptr<PointSolution>> sols(static_cast<size_t>(end - begin));
    std::vector<std::string> errors(static_cast<size_t>(end - begin));

    std::atomic<int> cursor{0};
    auto worker = [&] {
      for (;;) {
        const int local = cursor.fetch_add(1);
        if (local >= end - begin) return;
        try {
          Scenario sc = base;
          apply_axis(sc, axis, grid[static_cast<size_t>(begin + local)]);
          sols[static_cast<size_t>(local)] =
              std::make_unique<PointSolution>(evaluate_point(sc));
        } catch (const std::exception& e) {
          errors[static_cast<size_t>(local)] = e.what();
        }
      }
    };
    if (jobs == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    for (const auto& err : errors)
      if (!err.empty()) throw std::runtime_error("sweep point failed: " + err);

    for (int local = 0; local < end - begin; ++local) {
      const int point = begin + local;
      PointSolution& sol = *sols[static_cast<size_t>(local)];
      Scenario sc = base;
      apply_axis(sc, axis, grid[static_cast<size_t>(point)]);

      std::vector<int> indices;
      if (point == 0) {
        k_tracked = track_count > 0
                        ? std::min(track_count, sol.spectrum.size())
                        : sc.default_track_count();
        indices = lowest_indices(k_tracked);
      } else {
        Spectrum prev;  // only eigenvectors participate in tracking
        prev.eigenvectors = std::move(prev_vectors);
        prev.basis = sol.spectrum.basis;
        prev.eigenvalues = Eigen::VectorXd::Zero(k_tracked);
        indices = track_subset(prev, lowest_indices(k_tracked), sol.spectrum)
                      .permutation;
      }

      prev_vectors.resize(sol.spectrum.eigenvectors.rows(), k_tracked);
      for (int s = 0; s < k_tracked; ++s)
        prev_vectors.col(s) = sol.spectrum.eigenvectors.col(indices[static_cast<size_t>(s)]);

      const auto labels = label_states(sol, sc, indices);
      for (int s = 0; s < k_tracked; ++s) {
        const LabeledState& st = labels[static_cast<size_t>(s)];
        SweepRow row;
        row.axis_value = grid[static_cast<size_t>(point)];
        row.slot = s;
        row.energy_mhz = st.energy_mhz;
        row.lambda = st.lambda;
        row.m_abs = st.m_abs;
        row.fidelity = st.fidelity;
        row.mixed = st.mixed ? 1 : 0;
        row.alpha_au = st.alpha_au;
        result.rows.push_back(row);
      }
      sols[static_cast<size_t>(local)].reset();
    }
  }

  result.states_per_point = k_tracked;
  result.provenance =
      detail::scenario_provenance(base, axis, grid.size(), k_tracked);
  return result;
}

inline void emit_csv(const SweepResult& result, std::ostream& out,
                     bool timestamp = true) {
  for (const auto& line : result.provenance) out << "# " << line << "\n";
  if (timestamp) {
    char buf[64];
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    out << "# generated: " << buf << "\n";
  }
  out << result.axis << ",slot,energy_mhz,lambda,m_abs,fidelity,mixed,alpha_au\n";
  for (const auto& r : result.rows) {
    out << detail::fmt12(r.axis_value) << ',' << r.slot << ','
        << detail::fmt12(r.energy_mhz) << ',' << r.lambda << ',' << r.m_abs
        << ',' << detail::fmt12(r.fidelity) << ',' << r.mixed << ','
        << detail::fmt12(r.alpha_au) << "\n";
  }
}

inline void emit_csv(const SweepResult& result, const std::string& path,
                     bool timestamp = true) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  emit_csv(result, out, timestamp);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

/// One panel of a figure recipe.
struct FigurePanel {
  std::string name;  // file suffix
  Scenario scenario;
  SweepAxis axis;
  std::vector<double> grid;
};

/// The sweeps behind the published level/polarizability landscapes:
///   fig2  levels vs E_x (no trapping laser)
///   fig3  alpha vs theta at small E (E along z and along x)
///   fig4  alpha vs theta at E_x = 2.0, 5.265, 8.0 kV/cm
///   fig5  alpha vs E_x at eleven angles
///   fig6  alpha vs intensity at four (E_x, theta) pairs
inline std::vector<FigurePanel> figure_recipe(const std::string& name,
                                              const Scenario& base) {
  const Eigen::Vector3d xhat(1.0, 0.0, 0.0);
  const Eigen::Vector3d zhat(0.0, 0.0, 1.0);
  Scenario sc = base;
  std::vector<FigurePanel> panels;

  if (name == "fig2") {
    sc.geometry.e_dir = xhat;
    sc.geometry.intensity_kw_cm2 = 0.0;  // no trapping laser
    sc.geometry.set_polarization_theta_deg(0.0);
    panels.push_back({"levels", sc, SweepAxis::EField, parse_grid("0:1.2:200")});
    return panels;
  }
  if (name == "fig3") {
    int tag = 'a';
    for (const auto& dir : {zhat, xhat}) {
      for (const double e : {0.0, 0.06, 0.09}) {
        Scenario p = base;
        p.geometry.e_dir = dir;
        p.geometry.e_kvcm = e;
        panels.push_back({std::string(1, static_cast<char>(tag++)), p,
                          SweepAxis::Theta, parse_grid("0:90:19")});
      }
    }
    return panels;
  }
  if (name == "fig4") {
    int tag = 'a';
    for (const double e : {2.0, 5.265, 8.0}) {
      Scenario p = base;
      p.geometry.e_dir = xhat;
      p.geometry.e_kvcm = e;
      panels.push_back({std::string(1, static_cast<char>(tag++)), p,
                        SweepAxis::Theta, parse_grid("0:90:19")});
    }
    return panels;
  }
  if (name == "fig5") {
    std::vector<double> angles = {0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 35.3};
    for (const double th : angles) {
      Scenario p = base;
      p.geometry.e_dir = xhat;
      p.geometry.set_polarization_theta_deg(th);
      char buf[32];
      std::snprintf(buf, sizeof(buf), "theta%g", th);
      panels.push_back({buf, p, SweepAxis::EField, parse_grid("0.25:10:40")});
    }
    return panels;
  }
  if (name == "fig6") {
    const std::pair<double, double> pairs[] = {
        {0.0, 60.0}, {0.09, 60.0}, {2.0, 35.3}, {5.265, 60.0}};
    int tag = 'a';
    for (const auto& [e, th] : pairs) {
      Scenario p = base;
      p.geometry.e_dir = xhat;
      p.geometry.e_kvcm = e;
      p.geometry.set_polarization_theta_deg(th);
      panels.push_back({std::string(1, static_cast<char>(tag++)), p,
                        SweepAxis::Intensity, parse_grid("0:10:21")});
    }
    return panels;
  }
  throw std::invalid_argument("unknown figure '" + name +
                              "' (expected fig2..fig6)");
}

}  // namespace magictrap
