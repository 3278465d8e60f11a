#pragma once

#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>

namespace magictrap {

/// Angular-momentum quantum number stored as twice its value, so that
/// half-integers like 3/2 are exact and parity checks are integer checks.
class HalfInteger {
 public:
  constexpr HalfInteger() = default;
  constexpr explicit HalfInteger(int whole) : twice_(2 * whole) {}

  static constexpr HalfInteger from_twice(int twice) {
    HalfInteger h;
    h.twice_ = twice;
    return h;
  }

  /// Accepts "4", "3/2", "1.5", "-0.5". Throws std::invalid_argument on
  /// anything that is not an exact multiple of 1/2.
  static HalfInteger parse(std::string_view text);

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }

  /// Whole-number value; only meaningful when is_integer().
  constexpr int as_int() const { return twice_ / 2; }

  constexpr bool same_parity(HalfInteger other) const {
    return ((twice_ ^ other.twice_) & 1) == 0;
  }

  /// True when this is a valid projection of magnitude j: |m| <= j and
  /// m differs from j by an integer.
  constexpr bool is_projection_of(HalfInteger j) const {
    return same_parity(j) && twice_ >= -j.twice_ && twice_ <= j.twice_;
  }

  friend constexpr HalfInteger operator+(HalfInteger a, HalfInteger b) {
    return from_twice(a.twice_ + b.twice_);
  }
  friend constexpr HalfInteger operator-(HalfInteger a, HalfInteger b) {
    return from_twice(a.twice_ - b.twice_);
  }
  friend constexpr HalfInteger operator-(HalfInteger a) {
    return from_twice(-a.twice_);
  }
  friend constexpr bool operator==(HalfInteger a, HalfInteger b) {
    return a.twice_ == b.twice_;
  }
  friend constexpr bool operator!=(HalfInteger a, HalfInteger b) {
    return a.twice_ != b.twice_;
  }
  friend constexpr bool operator<(HalfInteger a, HalfInteger b) {
    return a.twice_ < b.twice_;
  }
  friend constexpr bool operator<=(HalfInteger a, HalfInteger b) {
    return a.twice_ <= b.twice_;
  }
  friend constexpr bool operator>(HalfInteger a, HalfInteger b) {
    return a.twice_ > b.twice_;
  }
  friend constexpr bool operator>=(HalfInteger a, HalfInteger b) {
    return a.twice_ >= b.twice_;
  }

  std::string str() const {
    if (is_integer()) return std::to_string(as_int());
    return std::to_string(twice_) + "/2";
  }

 private:
  int twice_ = 0;
};

inline HalfInteger abs(HalfInteger h) {
  return HalfInteger::from_twice(h.twice() < 0 ? -h.twice() : h.twice());
}

inline HalfInteger HalfInteger::parse(std::string_view text) {
  const std::string s(text);
  if (s.empty()) throw std::invalid_argument("empty half-integer");
  const auto slash = s.find('/');
  if (slash != std::string::npos) {
    const std::string num = s.substr(0, slash);
    const std::string den = s.substr(slash + 1);
    if (den != "2" && den != "1")
      throw std::invalid_argument("half-integer denominator must be 1 or 2: " + s);
    size_t pos = 0;
    const int n = std::stoi(num, &pos);
    if (pos != num.size())
      throw std::invalid_argument("bad half-integer numerator: " + s);
    return from_twice(den == "2" ? n : 2 * n);
  }
  size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("bad half-integer: " + s);
  const double tv = 2.0 * v;
  const long long t = std::llround(tv);
  if (tv != static_cast<double>(t))
    throw std::invalid_argument("value is not a multiple of 1/2: " + s);
  return from_twice(static_cast<int>(t));
}

}  // namespace magictrap
