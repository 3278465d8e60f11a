#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "magictrap/half_integer.hpp"

namespace magictrap {

using Complex = std::complex<double>;

namespace detail {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

// Largest factorial argument needed: j1+j2+j3+1 with 2j <= 84 each.
inline constexpr int kMaxFactorial = 128;

inline const BigInt& factorial(int n) {
  static const std::vector<BigInt> table = [] {
    std::vector<BigInt> t(kMaxFactorial + 1);
    t[0] = 1;
    for (int i = 1; i <= kMaxFactorial; ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  if (n < 0 || n > kMaxFactorial)
    throw std::invalid_argument("factorial argument out of range");
  return table[static_cast<size_t>(n)];
}

inline double rational_to_double(const BigRat& r) {
  using Float = boost::multiprecision::cpp_bin_float_50;
  const Float num(boost::multiprecision::numerator(r));
  const Float den(boost::multiprecision::denominator(r));
  return (num / den).convert_to<double>();
}

}  // namespace detail

/// Wigner 3j symbol by the Racah sum in exact rational arithmetic
/// (Condon-Shortley phases). Returns exactly 0 whenever a selection rule
/// fails; invalid (j, m) pairings also yield 0 rather than an error.
inline double wigner3j(HalfInteger j1, HalfInteger j2, HalfInteger j3,
                       HalfInteger m1, HalfInteger m2, HalfInteger m3) {
  if (j1.twice() < 0 || j2.twice() < 0 || j3.twice() < 0) return 0.0;
  if (!m1.is_projection_of(j1) || !m2.is_projection_of(j2) ||
      !m3.is_projection_of(j3))
    return 0.0;
  if (m1.twice() + m2.twice() + m3.twice() != 0) return 0.0;
  // triangle rule, and j1+j2+j3 must be an integer
  if (((j1.twice() + j2.twice() + j3.twice()) & 1) != 0) return 0.0;
  if (j3.twice() > j1.twice() + j2.twice()) return 0.0;
  if (j3.twice() < std::abs(j1.twice() - j2.twice())) return 0.0;

  using detail::BigRat;
  using detail::factorial;

  // All of these are non-negative integers for inputs that passed selection.
  const int a1 = (j1.twice() + j2.twice() - j3.twice()) / 2;
  const int a2 = (j1.twice() - j2.twice() + j3.twice()) / 2;
  const int a3 = (-j1.twice() + j2.twice() + j3.twice()) / 2;
  const int perimeter1 = (j1.twice() + j2.twice() + j3.twice()) / 2 + 1;

  const int j1p = (j1.twice() + m1.twice()) / 2;
  const int j1m = (j1.twice() - m1.twice()) / 2;
  const int j2p = (j2.twice() + m2.twice()) / 2;
  const int j2m = (j2.twice() - m2.twice()) / 2;
  const int j3p = (j3.twice() + m3.twice()) / 2;
  const int j3m = (j3.twice() - m3.twice()) / 2;

  const BigRat front = BigRat(factorial(a1) * factorial(a2) * factorial(a3),
                              factorial(perimeter1)) *
                       BigRat(factorial(j1p) * factorial(j1m) * factorial(j2p) *
                                  factorial(j2m) * factorial(j3p) * factorial(j3m),
                              1);

  const int kmin = std::max({0, (j2.twice() - j3.twice() - m1.twice()) / 2,
                             (j1.twice() - j3.twice() + m2.twice()) / 2});
  const int kmax = std::min({a1, j1m, j2p});

  BigRat sum = 0;
  for (int k = kmin; k <= kmax; ++k) {
    const int d1 = a1 - k;
    const int d2 = j1m - k;
    const int d3 = j2p - k;
    const int d4 = (j3.twice() - j2.twice() + m1.twice()) / 2 + k;
    const int d5 = (j3.twice() - j1.twice() - m2.twice()) / 2 + k;
    if (d1 < 0 || d2 < 0 || d3 < 0 || d4 < 0 || d5 < 0) continue;
    BigRat term(1, factorial(k) * factorial(d1) * factorial(d2) *
                       factorial(d3) * factorial(d4) * factorial(d5));
    if (k & 1) term = -term;
    sum += term;
  }
  if (sum == 0) return 0.0;

  const int phase_exp = (j1.twice() - j2.twice() - m3.twice()) / 2;
  double sign = (phase_exp % 2 != 0) ? -1.0 : 1.0;
  if (sum < 0) sign = -sign;
  const BigRat value_sq = front * sum * sum;
  return sign * std::sqrt(detail::rational_to_double(value_sq));
}

/// <N,m| C_kq |N2,m2> for integer rotor states, with
/// C_kq = sqrt(4 pi / (2k+1)) Y_kq.
inline double c_tensor_element(HalfInteger n, HalfInteger m, int k, int q,
                               HalfInteger n2, HalfInteger m2) {
  if (!n.is_integer() || !n2.is_integer())
    throw std::invalid_argument("c_tensor_element requires integer rotor N");
  const double threej0 = wigner3j(n, HalfInteger(k), n2, HalfInteger(0),
                                  HalfInteger(0), HalfInteger(0));
  if (threej0 == 0.0) return 0.0;
  const double threejm = wigner3j(n, HalfInteger(k), n2, -m, HalfInteger(q), m2);
  if (threejm == 0.0) return 0.0;
  const double norm =
      std::sqrt(double(n.twice() + 1) * double(n2.twice() + 1));
  const double phase = (m.as_int() % 2 != 0) ? -1.0 : 1.0;
  return phase * norm * threej0 * threejm;
}

/// <I,m| T_2q(I,I) |I,m2> from ladder operators:
/// T_20 = (3 Iz^2 - I^2)/sqrt(6), T_2+-1 = -+(Iz I+- + I+- Iz)/2,
/// T_2+-2 = I+-^2 / 2.
inline double spin_tensor_element(HalfInteger i_spin, HalfInteger m, int q,
                                  HalfInteger m2) {
  if (!m.is_projection_of(i_spin) || !m2.is_projection_of(i_spin)) return 0.0;
  if (m.twice() != m2.twice() + 2 * q) return 0.0;
  const double i = i_spin.value();
  const double mv = m2.value();
  const auto raise = [&](double mm) {
    return std::sqrt((i - mm) * (i + mm + 1.0));
  };
  const auto lower = [&](double mm) {
    return std::sqrt((i + mm) * (i - mm + 1.0));
  };
  switch (q) {
    case 0:
      return (3.0 * mv * mv - i * (i + 1.0)) / std::sqrt(6.0);
    case +1:
      return -0.5 * raise(mv) * (2.0 * mv + 1.0);
    case -1:
      return +0.5 * lower(mv) * (2.0 * mv - 1.0);
    case +2:
      return 0.5 * raise(mv) * raise(mv + 1.0);
    case -2:
      return 0.5 * lower(mv) * lower(mv - 1.0);
    default:
      return 0.0;
  }
}

/// Spherical components of a vector, v_0 = v_z, v_+-1 = -+(v_x +- i v_y)/sqrt(2).
struct SphericalVector {
  Complex q_minus1{0.0, 0.0};
  Complex q_0{0.0, 0.0};
  Complex q_plus1{0.0, 0.0};

  Complex component(int q) const {
    switch (q) {
      case -1:
        return q_minus1;
      case 0:
        return q_0;
      case +1:
        return q_plus1;
      default:
        throw std::invalid_argument("SphericalVector component index");
    }
  }
};

inline SphericalVector spherical_components(const Eigen::Vector3d& v) {
  if (std::abs(v.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("spherical_components: vector is not unit length");
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  SphericalVector s;
  s.q_0 = Complex(v.z(), 0.0);
  s.q_plus1 = -inv_sqrt2 * Complex(v.x(), v.y());
  s.q_minus1 = +inv_sqrt2 * Complex(v.x(), -v.y());
  return s;
}

/// Rank-2 polarization tensor T_2(eps, eps), components q = -2..2.
struct PolarizationTensor {
  std::array<Complex, 5> t{};  // index q + 2

  Complex component(int q) const {
    if (q < -2 || q > 2) throw std::invalid_argument("PolarizationTensor index");
    return t[static_cast<size_t>(q + 2)];
  }
  Complex& component(int q) {
    if (q < -2 || q > 2) throw std::invalid_argument("PolarizationTensor index");
    return t[static_cast<size_t>(q + 2)];
  }
};

/// t_q = sum_{q1,q2} <1 q1 1 q2|2 q> eps_q1 eps_q2.
inline PolarizationTensor polarization_tensor(const SphericalVector& eps) {
  PolarizationTensor out;
  const HalfInteger one(1), two(2);
  for (int q = -2; q <= 2; ++q) {
    Complex acc(0.0, 0.0);
    for (int q1 = -1; q1 <= 1; ++q1) {
      const int q2 = q - q1;
      if (q2 < -1 || q2 > 1) continue;
      // <1 q1 1 q2|2 q> = (-1)^q sqrt(5) * 3j(1,1,2; q1,q2,-q)
      const double cg = ((q % 2) != 0 ? -1.0 : 1.0) * std::sqrt(5.0) *
                        wigner3j(one, one, two, HalfInteger(q1), HalfInteger(q2),
                                 HalfInteger(-q));
      if (cg == 0.0) continue;
      acc += cg * eps.component(q1) * eps.component(q2);
    }
    out.component(q) = acc;
  }
  return out;
}

/// Orthonormal rotation into a frame whose third axis is a given direction.
/// Rows of the matrix are the frame axes expressed in lab coordinates, so
/// to_frame() maps lab components to frame components.
class Frame {
 public:
  explicit Frame(const Eigen::Matrix3d& rows) : rows_(rows) {}

  Eigen::Vector3d to_frame(const Eigen::Vector3d& lab) const {
    return rows_ * lab;
  }
  const Eigen::Matrix3d& rotation() const { return rows_; }
  Eigen::Vector3d axis() const { return rows_.row(2); }

 private:
  Eigen::Matrix3d rows_;
};

/// Frame with z along e_direction. If e is not parallel to lab z, the frame
/// x axis lies in the plane spanned by e and lab z; if parallel, frame = lab
/// (anti-parallel keeps lab x as frame x).
inline Frame build_frame(const Eigen::Vector3d& e_direction) {
  const double norm = e_direction.norm();
  if (norm < 1e-300)
    throw std::invalid_argument("build_frame: zero-length direction");
  const Eigen::Vector3d ez = e_direction / norm;
  const Eigen::Vector3d lab_z(0.0, 0.0, 1.0);
  Eigen::Vector3d ex;
  const Eigen::Vector3d perp = lab_z - lab_z.dot(ez) * ez;
  if (perp.norm() < 1e-12) {
    if (ez.z() > 0.0) {
      Eigen::Matrix3d id = Eigen::Matrix3d::Identity();
      return Frame(id);
    }
    ex = Eigen::Vector3d(1.0, 0.0, 0.0);
  } else {
    ex = perp.normalized();
  }
  const Eigen::Vector3d ey = ez.cross(ex);
  Eigen::Matrix3d rows;
  rows.row(0) = ex;
  rows.row(1) = ey;
  rows.row(2) = ez;
  return Frame(rows);
}

}  // namespace magictrap
