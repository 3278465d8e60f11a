#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "magictrap/angular.hpp"
#include "magictrap/molecule.hpp"

namespace magictrap {

/// One uncoupled ket |N, m, m_a, m_b> with quantization axis along the
/// electric field.
struct BasisState {
  HalfInteger n;    // rotor N (integer-valued)
  HalfInteger m;    // rotor projection on the E axis
  HalfInteger m_a;  // nuclear projection, nucleus a
  HalfInteger m_b;  // nuclear projection, nucleus b
};

/// Ordered product basis, lexicographic in (N, m, m_a, m_b).
class Basis {
 public:
  Basis(int n_max, HalfInteger spin_a, HalfInteger spin_b)
      : n_max_(n_max), spin_a_(spin_a), spin_b_(spin_b) {
    if (n_max < 0) throw std::invalid_argument("build_basis: n_max must be >= 0");
    if (spin_a.twice() < 0 || spin_b.twice() < 0)
      throw std::invalid_argument("build_basis: spins must be >= 0");
    states_.reserve(static_cast<size_t>(n_max + 1) * (n_max + 1) *
                    (spin_a.twice() + 1) * (spin_b.twice() + 1));
    for (int n = 0; n <= n_max; ++n)
      for (int m = -n; m <= n; ++m)
        for (int ta = -spin_a.twice(); ta <= spin_a.twice(); ta += 2)
          for (int tb = -spin_b.twice(); tb <= spin_b.twice(); tb += 2)
            states_.push_back(BasisState{HalfInteger(n), HalfInteger(m),
                                         HalfInteger::from_twice(ta),
                                         HalfInteger::from_twice(tb)});
  }

  int size() const { return static_cast<int>(states_.size()); }
  int n_max() const { return n_max_; }
  HalfInteger spin_a() const { return spin_a_; }
  HalfInteger spin_b() const { return spin_b_; }
  const BasisState& state(int i) const { return states_[static_cast<size_t>(i)]; }
  const std::vector<BasisState>& states() const { return states_; }

  /// Index of |n, m, m_a, m_b>, or -1 when the ket is outside the basis.
  int index_of(int n, int m, HalfInteger m_a, HalfInteger m_b) const {
    if (n < 0 || n > n_max_ || m < -n || m > n) return -1;
    if (!m_a.is_projection_of(spin_a_) || !m_b.is_projection_of(spin_b_))
      return -1;
    const int mult_b = spin_b_.twice() + 1;
    const int mult = (spin_a_.twice() + 1) * mult_b;
    const int rotor = n * n + (m + n);
    const int sa = (m_a.twice() + spin_a_.twice()) / 2;
    const int sb = (m_b.twice() + spin_b_.twice()) / 2;
    return rotor * mult + sa * mult_b + sb;
  }

 private:
  int n_max_;
  HalfInteger spin_a_, spin_b_;
  std::vector<BasisState> states_;
};

inline std::shared_ptr<const Basis> build_basis(int n_max, HalfInteger spin_a,
                                                HalfInteger spin_b) {
  return std::make_shared<const Basis>(n_max, spin_a, spin_b);
}

/// Static and optical field configuration in lab coordinates. The lab z axis
/// carries the magnetic field by convention; the quantization axis follows
/// the electric field whenever it is nonzero.
struct FieldGeometry {
  double b_mt = 8.57;
  Eigen::Vector3d b_dir{0.0, 0.0, 1.0};
  double e_kvcm = 0.0;
  Eigen::Vector3d e_dir{1.0, 0.0, 0.0};
  double wavelength_nm = 1064.0;
  double intensity_kw_cm2 = 2.35;
  Eigen::Vector3d pol_dir{0.0, 0.0, 1.0};

  /// Laser polarization in the lab xz plane at angle theta from lab z
  /// (the laser propagates along lab y).
  void set_polarization_theta_deg(double theta_deg) {
    const double t = theta_deg * std::numbers::pi / 180.0;
    pol_dir = Eigen::Vector3d(std::sin(t), 0.0, std::cos(t));
  }

  /// Orient the polarization at angle psi_m from the electric-field axis,
  /// inside the plane spanned by e_dir and the lab y axis normal.
  void set_polarization_psi_deg(double psi_deg) {
    const Eigen::Vector3d e = e_dir.normalized();
    Eigen::Vector3d perp = e.cross(Eigen::Vector3d(0.0, 1.0, 0.0));
    if (perp.norm() < 1e-12)
      throw std::invalid_argument(
          "set_polarization_psi_deg: electric field along the propagation axis");
    perp.normalize();
    const double p = psi_deg * std::numbers::pi / 180.0;
    pol_dir = std::cos(p) * e + std::sin(p) * perp;
  }

  void validate() const {
    if (b_mt < 0.0 || e_kvcm < 0.0 || intensity_kw_cm2 < 0.0)
      throw std::invalid_argument("FieldGeometry: magnitudes must be >= 0");
    if (wavelength_nm <= 0.0)
      throw std::invalid_argument("FieldGeometry: wavelength must be > 0");
    if (std::abs(b_dir.norm() - 1.0) > 1e-9 ||
        std::abs(e_dir.norm() - 1.0) > 1e-9 ||
        std::abs(pol_dir.norm() - 1.0) > 1e-9)
      throw std::invalid_argument("FieldGeometry: directions must be unit vectors");
  }

  /// Quantization axis: along E when |E| > 0, else along B.
  Eigen::Vector3d quantization_axis() const {
    return e_kvcm > 0.0 ? e_dir.normalized() : b_dir.normalized();
  }

  Frame quantization_frame() const { return build_frame(quantization_axis()); }

  /// Angle between polarization and the electric-field axis, folded to
  /// [0, 90] degrees (the polarization is sign-free).
  double psi_m_deg() const {
    const double c = std::abs(pol_dir.normalized().dot(quantization_axis()));
    return std::acos(std::min(1.0, c)) * 180.0 / std::numbers::pi;
  }

  /// Angle between polarization and the magnetic field, folded to [0, 90].
  double theta_deg() const {
    const double c = std::abs(pol_dir.normalized().dot(b_dir.normalized()));
    return std::acos(std::min(1.0, c)) * 180.0 / std::numbers::pi;
  }
};

/// Dense Hermitian operator over a Basis, in h*MHz (or h*MHz per kW/cm^2 for
/// the per-intensity light-shift operator).
struct OperatorMatrix {
  Eigen::MatrixXcd mat;
  std::shared_ptr<const Basis> basis;

  int dim() const { return static_cast<int>(mat.rows()); }

  double hermiticity_error() const {
    return (mat - mat.adjoint()).cwiseAbs().maxCoeff();
  }
};

inline OperatorMatrix zero_operator(std::shared_ptr<const Basis> basis) {
  OperatorMatrix op;
  op.mat = Eigen::MatrixXcd::Zero(basis->size(), basis->size());
  op.basis = std::move(basis);
  return op;
}

/// H_rot = B N^2: diagonal N(N+1) B.
inline OperatorMatrix h_rot(std::shared_ptr<const Basis> basis, double b_rot_mhz) {
  OperatorMatrix op = zero_operator(std::move(basis));
  for (int i = 0; i < op.dim(); ++i) {
    const double n = op.basis->state(i).n.value();
    op.mat(i, i) = n * (n + 1.0) * b_rot_mhz;
  }
  return op;
}

/// DC Stark term in the E frame: -d E <N,m|C_10|N',m>, coupling N' = N +- 1
/// at fixed m, m_a, m_b.
inline OperatorMatrix h_stark(std::shared_ptr<const Basis> basis,
                              double dipole_ea0, double e_kvcm) {
  OperatorMatrix op = zero_operator(std::move(basis));
  const double scale = stark_energy_scale(dipole_ea0, e_kvcm);
  if (scale == 0.0) return op;
  const Basis& b = *op.basis;
  for (int i = 0; i < b.size(); ++i) {
    const BasisState& s = b.state(i);
    const int n = s.n.as_int();
    const int m = s.m.as_int();
    for (const int n2 : {n - 1, n + 1}) {
      const int j = b.index_of(n2, m, s.m_a, s.m_b);
      if (j < 0) continue;
      op.mat(i, j) = -scale * c_tensor_element(s.n, s.m, 1, 0, HalfInteger(n2), s.m);
    }
  }
  return op;
}

namespace detail {

/// Rotor-side table of <N,m|C_{k,mu}|N',m'> over all rotor pairs, indexed by
/// r(N,m) = N^2 + N + m. Built once per operator construction so the exact
/// 3j evaluations are not repeated per matrix element.
class CTensorTable {
 public:
  CTensorTable(int n_max, int k) : n_max_(n_max), k_(k) {
    const int r = (n_max + 1) * (n_max + 1);
    table_.assign(static_cast<size_t>(r) * r * (2 * k + 1), 0.0);
    for (int n = 0; n <= n_max; ++n)
      for (int m = -n; m <= n; ++m)
        for (int n2 = 0; n2 <= n_max; ++n2)
          for (int m2 = -n2; m2 <= n2; ++m2)
            for (int mu = -k; mu <= k; ++mu) {
              if (m != mu + m2) continue;
              at(n, m, mu, n2, m2) =
                  c_tensor_element(HalfInteger(n), HalfInteger(m), k, mu,
                                   HalfInteger(n2), HalfInteger(m2));
            }
  }

  double operator()(int n, int m, int mu, int n2, int m2) const {
    if (n < 0 || n > n_max_ || n2 < 0 || n2 > n_max_) return 0.0;
    if (std::abs(m) > n || std::abs(m2) > n2 || std::abs(mu) > k_) return 0.0;
    return table_[index(n, m, mu, n2, m2)];
  }

 private:
  size_t index(int n, int m, int mu, int n2, int m2) const {
    const size_t r = static_cast<size_t>(n * n + n + m);
    const size_t r2 = static_cast<size_t>(n2 * n2 + n2 + m2);
    const size_t nr = static_cast<size_t>((n_max_ + 1) * (n_max_ + 1));
    return (r * nr + r2) * (2 * k_ + 1) + static_cast<size_t>(mu + k_);
  }
  double& at(int n, int m, int mu, int n2, int m2) {
    return table_[index(n, m, mu, n2, m2)];
  }

  int n_max_;
  int k_;
  std::vector<double> table_;
};

/// Spherical component of the nuclear spin vector operator,
/// <I m | I_q | I m2>.
inline double spin_vector_element(HalfInteger i_spin, HalfInteger m, int q,
                                  HalfInteger m2) {
  if (!m.is_projection_of(i_spin) || !m2.is_projection_of(i_spin)) return 0.0;
  if (m.twice() != m2.twice() + 2 * q) return 0.0;
  const double i = i_spin.value();
  const double mv = m2.value();
  switch (q) {
    case 0:
      return mv;
    case +1:
      return -std::sqrt((i - mv) * (i + mv + 1.0) / 2.0);
    case -1:
      return +std::sqrt((i + mv) * (i - mv + 1.0) / 2.0);
    default:
      return 0.0;
  }
}

}  // namespace detail

/// Nuclear electric-quadrupole interaction,
///   H_Q = sum_k (eqQ)_k sqrt(6)/(4 I_k (2I_k - 1)) T_2(I_k,I_k) . C_2
/// with T_2 . C_2 = sum_q (-1)^q T_2q C_{2,-q}. Nuclei with I < 1 do not
/// contribute.
inline OperatorMatrix h_quadrupole(std::shared_ptr<const Basis> basis,
                                   double eqq_a_mhz, double eqq_b_mhz,
                                   HalfInteger spin_a, HalfInteger spin_b) {
  OperatorMatrix op = zero_operator(std::move(basis));
  const Basis& b = *op.basis;
  if (spin_a != b.spin_a() || spin_b != b.spin_b())
    throw std::invalid_argument("h_quadrupole: spins do not match the basis");
  const detail::CTensorTable c2(b.n_max(), 2);

  struct Nucleus {
    double eqq;
    HalfInteger spin;
    bool is_a;
  };
  for (const Nucleus nuc : {Nucleus{eqq_a_mhz, spin_a, true},
                            Nucleus{eqq_b_mhz, spin_b, false}}) {
    if (nuc.eqq == 0.0 || nuc.spin.twice() < 2) continue;
    const double i = nuc.spin.value();
    const double pref = nuc.eqq * std::sqrt(6.0) / (4.0 * i * (2.0 * i - 1.0));
    for (int row = 0; row < b.size(); ++row) {
      const BasisState& s = b.state(row);
      const int n = s.n.as_int();
      const int m = s.m.as_int();
      const HalfInteger mi = nuc.is_a ? s.m_a : s.m_b;
      for (int q = -2; q <= 2; ++q) {
        // <m_I | T_2q | m_I'> requires m_I' = m_I - q; rotor picks up
        // C_{2,-q} with m' = m + q.
        const HalfInteger mi2 = mi - HalfInteger(q);
        const double spin_part = spin_tensor_element(nuc.spin, mi, q, mi2);
        if (spin_part == 0.0) continue;
        const double qsign = (q % 2 != 0) ? -1.0 : 1.0;
        for (const int n2 : {n - 2, n, n + 2}) {
          const double rot = c2(n, m, -q, n2, m + q);
          if (rot == 0.0) continue;
          const int col = nuc.is_a ? b.index_of(n2, m + q, mi2, s.m_b)
                                   : b.index_of(n2, m + q, s.m_a, mi2);
          if (col < 0) continue;
          op.mat(row, col) += pref * qsign * spin_part * rot;
        }
      }
    }
  }
  return op;
}

/// Nuclear Zeeman term, H_Z = -sum_k g_k mu_N I_k . B, with the magnetic
/// field direction given by its spherical components in the E frame.
inline OperatorMatrix h_zeeman(std::shared_ptr<const Basis> basis, double g_a,
                               double g_b, const SphericalVector& b_hat,
                               double b_mt) {
  OperatorMatrix op = zero_operator(std::move(basis));
  const Basis& b = *op.basis;

  struct Nucleus {
    double g;
    HalfInteger spin;
    bool is_a;
  };
  for (const Nucleus nuc : {Nucleus{g_a, b.spin_a(), true},
                            Nucleus{g_b, b.spin_b(), false}}) {
    if (nuc.g == 0.0 || b_mt == 0.0 || nuc.spin.twice() == 0) continue;
    const double pref = -nuc.g * units::kNuclearMagnetonMhzPerMt * b_mt;
    for (int row = 0; row < b.size(); ++row) {
      const BasisState& s = b.state(row);
      const HalfInteger mi = nuc.is_a ? s.m_a : s.m_b;
      for (int q = -1; q <= 1; ++q) {
        const HalfInteger mi2 = mi - HalfInteger(q);
        const double amp = detail::spin_vector_element(nuc.spin, mi, q, mi2);
        if (amp == 0.0) continue;
        const int col = nuc.is_a
                            ? b.index_of(s.n.as_int(), s.m.as_int(), mi2, s.m_b)
                            : b.index_of(s.n.as_int(), s.m.as_int(), s.m_a, mi2);
        if (col < 0) continue;
        // I . B = sum_q (-1)^q I_q b_{-q}
        const double qsign = (q != 0) ? -1.0 : 1.0;
        op.mat(row, col) += pref * qsign * amp * b_hat.component(-q);
      }
    }
  }
  return op;
}

/// Per-intensity light-shift operator W (h*MHz per kW/cm^2), defined by
/// H_pol = I_trap * W with
///   W = -(1/3)(a_par + 2 a_perp) - (sqrt(6)/3)(a_par - a_perp) T_2(eps,eps).C_2
/// and polarizabilities supplied in atomic units.
inline OperatorMatrix h_pol_operator(std::shared_ptr<const Basis> basis,
                                     double alpha_par_au, double alpha_perp_au,
                                     const PolarizationTensor& pol) {
  OperatorMatrix op = zero_operator(std::move(basis));
  const Basis& b = *op.basis;
  const double iso = alpha_in_mhz_per_kw_cm2((alpha_par_au + 2.0 * alpha_perp_au) / 3.0);
  const double aniso =
      alpha_in_mhz_per_kw_cm2((std::sqrt(6.0) / 3.0) * (alpha_par_au - alpha_perp_au));
  const detail::CTensorTable c2(b.n_max(), 2);

  for (int i = 0; i < b.size(); ++i) op.mat(i, i) = -iso;

  for (int row = 0; row < b.size(); ++row) {
    const BasisState& s = b.state(row);
    const int n = s.n.as_int();
    const int m = s.m.as_int();
    for (int q = -2; q <= 2; ++q) {
      const Complex tq = pol.component(q);
      if (std::abs(tq) == 0.0) continue;
      const double qsign = (q % 2 != 0) ? -1.0 : 1.0;
      for (const int n2 : {n - 2, n, n + 2}) {
        // C_{2,-q} couples m' = m + q at fixed nuclear projections.
        const double rot = c2(n, m, -q, n2, m + q);
        if (rot == 0.0) continue;
        const int col = b.index_of(n2, m + q, s.m_a, s.m_b);
        if (col < 0) continue;
        op.mat(row, col) += -aniso * qsign * tq * rot;
      }
    }
  }
  return op;
}

/// H = sum(static terms) + intensity * W.
inline OperatorMatrix assemble(const std::vector<const OperatorMatrix*>& terms,
                               const OperatorMatrix* w,
                               double intensity_kw_cm2) {
  if (terms.empty() && w == nullptr)
    throw std::invalid_argument("assemble: no terms");
  const std::shared_ptr<const Basis> basis =
      terms.empty() ? w->basis : terms.front()->basis;
  OperatorMatrix out = zero_operator(basis);
  for (const OperatorMatrix* t : terms) {
    if (t->basis->size() != basis->size() || t->dim() != out.dim())
      throw std::invalid_argument("assemble: operator dimension mismatch");
    out.mat += t->mat;
  }
  if (w != nullptr) {
    if (w->dim() != out.dim())
      throw std::invalid_argument("assemble: operator dimension mismatch");
    out.mat += intensity_kw_cm2 * w->mat;
  }
  return out;
}

}  // namespace magictrap
