#pragma once

#include <mpfr.h>

#include <cmath>

// 256-bit floating point, just enough arithmetic for re-deriving the step
// moment formulas independently of the library's double-precision branches.
namespace testsupport {

class Big {
 public:
  Big() {
    mpfr_init2(v_, 256);
    mpfr_set_zero(v_, 1);
  }
  Big(double x) : Big() { mpfr_set_d(v_, x, MPFR_RNDN); }
  Big(const Big& o) : Big() { mpfr_set(v_, o.v_, MPFR_RNDN); }
  Big& operator=(const Big& o) {
    mpfr_set(v_, o.v_, MPFR_RNDN);
    return *this;
  }
  ~Big() { mpfr_clear(v_); }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

  friend Big operator+(const Big& a, const Big& b) {
    Big r;
    mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  friend Big operator-(const Big& a, const Big& b) {
    Big r;
    mpfr_sub(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  friend Big operator-(const Big& a) {
    Big r;
    mpfr_neg(r.v_, a.v_, MPFR_RNDN);
    return r;
  }
  friend Big operator*(const Big& a, const Big& b) {
    Big r;
    mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  friend Big operator/(const Big& a, const Big& b) {
    Big r;
    mpfr_div(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  friend Big exp(const Big& a) {
    Big r;
    mpfr_exp(r.v_, a.v_, MPFR_RNDN);
    return r;
  }
  friend Big sqrt(const Big& a) {
    Big r;
    mpfr_sqrt(r.v_, a.v_, MPFR_RNDN);
    return r;
  }

 private:
  mpfr_t v_;
};

struct BigMoments {
  Big coef_x_on_v, coef_x_on_grad, coef_v_decay, coef_v_on_grad;
  Big var_x, var_v, cov_xv;
};

// The moment formulas evaluated naively; at 256 bits the cancellations that
// break double precision cost nothing.
inline BigMoments big_step_moments(double h, double gamma) {
  const Big H(h), G(gamma), one(1.0), half(0.5), quarter(0.25);
  const Big e2 = exp(Big(-2.0) * H);
  const Big e4 = exp(Big(-4.0) * H);
  const Big em2 = one - e2;
  const Big em4 = one - e4;
  BigMoments m;
  m.coef_x_on_v = half * em2;
  m.coef_x_on_grad = half * G * (H - half * em2);
  m.coef_v_decay = e2;
  m.coef_v_on_grad = half * G * em2;
  m.var_x = G * (H + quarter * em4 - em2);
  m.var_v = G * em4;
  m.cov_xv = half * G * em2 * em2;
  return m;
}

// |got - want| / |want| evaluated in extended precision; 0 if both are 0.
inline double rel_err(double got, const Big& want) {
  const double w = want.to_double();
  if (w == 0.0) return got == 0.0 ? 0.0 : HUGE_VAL;
  return std::fabs(((Big(got) - want) / want).to_double());
}

}  // namespace testsupport
