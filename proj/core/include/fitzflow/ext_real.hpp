#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fitzflow {

/// Extended real value in R ∪ {+∞}. Negative infinity and NaN are rejected;
/// arithmetic follows the extended-real convention a + ∞ = ∞, min(a, ∞) = a.
class ExtReal {
 public:
  ExtReal() : v_(0.0) {}
  ExtReal(double v) : v_(v) {
    if (std::isnan(v) || v == -std::numeric_limits<double>::infinity())
      throw std::invalid_argument("ExtReal: value must be finite or +inf");
  }

  static ExtReal infinity() {
    return ExtReal(std::numeric_limits<double>::infinity());
  }

  bool is_finite() const { return std::isfinite(v_); }
  bool is_inf() const { return !std::isfinite(v_); }

  /// Raw double; +∞ maps to the IEEE infinity.
  double value() const { return v_; }

  /// Finite value, throwing on +∞.
  double finite_value() const {
    if (!is_finite()) throw std::domain_error("ExtReal: value is +inf");
    return v_;
  }

  friend ExtReal operator+(ExtReal a, ExtReal b) {
    if (a.is_inf() || b.is_inf()) return infinity();
    return ExtReal(a.v_ + b.v_);
  }
  /// Subtraction requires a finite subtrahend (∞ − ∞ is undefined here).
  friend ExtReal operator-(ExtReal a, ExtReal b) {
    if (b.is_inf()) throw std::domain_error("ExtReal: cannot subtract +inf");
    if (a.is_inf()) return infinity();
    return ExtReal(a.v_ - b.v_);
  }
  friend ExtReal operator*(double c, ExtReal a) {
    if (a.is_inf()) {
      if (c > 0) return infinity();
      if (c == 0) return ExtReal(0.0);  // 0·∞ = 0 (integral convention)
      throw std::domain_error("ExtReal: negative scale of +inf");
    }
    return ExtReal(c * a.v_);
  }

  friend bool operator<(ExtReal a, ExtReal b) { return a.v_ < b.v_; }
  friend bool operator>(ExtReal a, ExtReal b) { return a.v_ > b.v_; }
  friend bool operator<=(ExtReal a, ExtReal b) { return a.v_ <= b.v_; }
  friend bool operator>=(ExtReal a, ExtReal b) { return a.v_ >= b.v_; }
  friend bool operator==(ExtReal a, ExtReal b) { return a.v_ == b.v_; }

 private:
  double v_;
};

inline ExtReal ext_min(ExtReal a, ExtReal b) { return a <= b ? a : b; }

}  // namespace fitzflow
