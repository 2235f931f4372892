#pragma once

#include <cmath>
#include <limits>
#include <ostream>

namespace rdiag {

// A real number that may also be +inf or -inf as an explicit tag. Infinite
// values never enter arithmetic; callers branch on the tag.
class Extended {
 public:
  enum class Kind { finite, pos_inf, neg_inf };

  constexpr Extended() = default;
  constexpr Extended(double v) : value_(v) {}  // NOLINT: implicit by intent

  static constexpr Extended pos_infinity() { return Extended(Kind::pos_inf); }
  static constexpr Extended neg_infinity() { return Extended(Kind::neg_inf); }

  constexpr Kind kind() const { return kind_; }
  constexpr bool is_finite() const { return kind_ == Kind::finite; }
  constexpr bool is_pos_inf() const { return kind_ == Kind::pos_inf; }
  constexpr bool is_neg_inf() const { return kind_ == Kind::neg_inf; }

  // Only meaningful for finite values.
  constexpr double value() const { return value_; }

  // IEEE view, for reporting only.
  double to_double() const {
    switch (kind_) {
      case Kind::pos_inf: return std::numeric_limits<double>::infinity();
      case Kind::neg_inf: return -std::numeric_limits<double>::infinity();
      case Kind::finite: break;
    }
    return value_;
  }

  friend bool operator==(const Extended& a, const Extended& b) {
    return a.kind_ == b.kind_ && (a.kind_ != Kind::finite || a.value_ == b.value_);
  }

  friend std::ostream& operator<<(std::ostream& os, const Extended& x) {
    if (x.is_pos_inf()) return os << "+inf";
    if (x.is_neg_inf()) return os << "-inf";
    return os << x.value_;
  }

 private:
  constexpr explicit Extended(Kind k) : kind_(k) {}

  Kind kind_ = Kind::finite;
  double value_ = 0.0;
};

}  // namespace rdiag
