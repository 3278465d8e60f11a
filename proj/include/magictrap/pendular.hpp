#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace magictrap {

/// Eigenstate of H0 = H_rot + H_E at fixed m: a field-oriented rotor state
/// |lambda, m> with amplitudes over |N, m>, N = |m| .. n_max.
struct PendularState {
  int lambda = 0;
  int m = 0;
  double energy_mhz = 0.0;
  double energy_over_b = 0.0;
  Eigen::VectorXd amplitudes;  // over N = |m| .. n_max
  int n_max = 0;

  int n_min() const { return std::abs(m); }
};

/// Tridiagonal pendular matrix for fixed m:
///   <N|H0|N>   = N(N+1) B
///   <N|H0|N+1> = -dE * sqrt(((N+1)^2 - m^2) / ((2N+1)(2N+3)))
inline Eigen::MatrixXd pendular_h0(int n_max, int m, double b_rot_mhz,
                                   double d_times_e_mhz) {
  if (std::abs(m) > n_max)
    throw std::invalid_argument("pendular_h0: |m| exceeds n_max");
  const int dim = n_max - std::abs(m) + 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const double n = std::abs(m) + i;
    h(i, i) = n * (n + 1.0) * b_rot_mhz;
    if (i + 1 < dim) {
      const double num = (n + 1.0) * (n + 1.0) - double(m) * m;
      const double den = (2.0 * n + 1.0) * (2.0 * n + 3.0);
      h(i, i + 1) = h(i + 1, i) = -d_times_e_mhz * std::sqrt(num / den);
    }
  }
  return h;
}

/// All pendular states for m = -n_max .. n_max, each m diagonalized
/// separately; lambda counts energy order within fixed m starting at |m|.
inline std::vector<PendularState> pendular_spectrum(int n_max, double b_rot_mhz,
                                                    double d_times_e_mhz) {
  std::vector<PendularState> out;
  out.reserve(static_cast<size_t>((n_max + 1) * (n_max + 1)));
  for (int m = -n_max; m <= n_max; ++m) {
    const Eigen::MatrixXd h = pendular_h0(n_max, m, b_rot_mhz, d_times_e_mhz);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("pendular_spectrum: diagonalization failed");
    const int dim = static_cast<int>(h.rows());
    for (int k = 0; k < dim; ++k) {
      PendularState st;
      st.lambda = std::abs(m) + k;
      st.m = m;
      st.energy_mhz = solver.eigenvalues()(k);
      st.energy_over_b = st.energy_mhz / b_rot_mhz;
      st.amplitudes = solver.eigenvectors().col(k);
      // deterministic sign: largest-magnitude amplitude positive
      int imax = 0;
      for (int i = 1; i < dim; ++i)
        if (std::abs(st.amplitudes(i)) > std::abs(st.amplitudes(imax))) imax = i;
      if (st.amplitudes(imax) < 0.0) st.amplitudes = -st.amplitudes;
      st.n_max = n_max;
      out.push_back(std::move(st));
    }
  }
  return out;
}

namespace detail {
inline double c20_rotor_diag(double n, double m) {
  if (n == 0.0) return 0.0;
  return (n * (n + 1.0) - 3.0 * m * m) / ((2.0 * n - 1.0) * (2.0 * n + 3.0));
}

inline double c20_rotor_off2(double n, double m) {
  // <N,m|C_20|N+2,m>
  const double a = (n + 1.0) * (n + 1.0) - m * m;
  const double b = (n + 2.0) * (n + 2.0) - m * m;
  const double den = (2.0 * n + 1.0) * (2.0 * n + 3.0) * (2.0 * n + 3.0) *
                     (2.0 * n + 5.0);
  return 1.5 * std::sqrt(a * b / den);
}
}  // namespace detail

/// Orientation-alignment measure <C_20> of a pendular state, in [-1/2, 1].
inline double pendular_c20(const PendularState& state) {
  const int dim = static_cast<int>(state.amplitudes.size());
  const int n0 = state.n_min();
  double acc = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double a = state.amplitudes(i);
    acc += a * a * detail::c20_rotor_diag(n0 + i, state.m);
    if (i + 2 < dim)
      acc += 2.0 * a * state.amplitudes(i + 2) *
             detail::c20_rotor_off2(n0 + i, state.m);
  }
  return acc;
}

namespace detail {
inline const PendularState& pendular_find(const std::vector<PendularState>& states,
                                          int lambda, int m) {
  for (const auto& s : states)
    if (s.lambda == lambda && s.m == m) return s;
  throw std::invalid_argument("pendular state (lambda=" + std::to_string(lambda) +
                              ", m=" + std::to_string(m) + ") not in set");
}
}  // namespace detail

/// Reduced field omega* = dE/B at which <C_20> of (lambda=0, m=0) and
/// (lambda=1, m=0) coincide; the direction-independent magic field of the
/// pendular model. Bisection on [1, 4].
inline double pendular_c20_crossing(int n_max = 12) {
  const auto gap = [n_max](double omega) {
    const auto states = pendular_spectrum(n_max, 1.0, omega);
    return pendular_c20(detail::pendular_find(states, 0, 0)) -
           pendular_c20(detail::pendular_find(states, 1, 0));
  };
  double lo = 1.0, hi = 4.0;
  double glo = gap(lo);
  if (glo * gap(hi) > 0.0)
    throw std::runtime_error("pendular_c20_crossing: no sign change in [1, 4]");
  for (int it = 0; it < 64; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gmid = gap(mid);
    if (glo * gmid <= 0.0) {
      hi = mid;
    } else {
      lo = mid;
      glo = gmid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace magictrap
