#pragma once

#include <cmath>
#include <limits>

namespace sem {

// Nonnegative quantity tracked by its natural log.  The explicit constants
// chain products of exponentials whose true values exceed double range by
// hundreds of orders of magnitude; the log representation keeps them exact
// to machine precision while value() still yields the double (possibly inf).
class LogScaled {
 public:
  LogScaled() : ln_(-std::numeric_limits<double>::infinity()) {}

  static LogScaled from_value(double v) {
    LogScaled r;
    r.ln_ = v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
    return r;
  }
  static LogScaled from_ln(double ln) {
    LogScaled r;
    r.ln_ = ln;
    return r;
  }

  double ln() const { return ln_; }
  double value() const { return std::exp(ln_); }
  bool is_zero() const { return std::isinf(ln_) && ln_ < 0.0; }
  bool fits_double() const { return ln_ < 709.78; }

  friend LogScaled operator*(LogScaled a, LogScaled b) {
    if (a.is_zero() || b.is_zero()) return LogScaled();
    return from_ln(a.ln_ + b.ln_);
  }
  friend LogScaled operator/(LogScaled a, LogScaled b) {
    return from_ln(a.ln_ - b.ln_);
  }
  friend LogScaled operator+(LogScaled a, LogScaled b) {  // log-sum-exp
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    const double hi = a.ln_ > b.ln_ ? a.ln_ : b.ln_;
    const double lo = a.ln_ > b.ln_ ? b.ln_ : a.ln_;
    return from_ln(hi + std::log1p(std::exp(lo - hi)));
  }
  LogScaled pow(double e) const {
    if (is_zero()) return e == 0.0 ? from_value(1.0) : LogScaled();
    return from_ln(ln_ * e);
  }

 private:
  double ln_;
};

}  // namespace sem
