// Single-oscillator Gaussian states of an optical field mode.
//
// A state is held either as the exponent parameters (a, b, c) of its Wigner
// quasi-distribution
//
//     W(x, y) = (2/pi) sqrt(D) exp(-[a dx^2 + b dy^2 - 2 c dx dy]),
//     D = a b - c^2,  dx = x - <x>,  dy = y - <y>,
//
// or as a covariance matrix of doubled second moments (vacuum == identity):
// quadrature form  M = [[2<dx^2>, 2<dx dy>], [2<dx dy>, 2<dy^2>]]  or the
// complex-amplitude form built from 2<|da|^2> and 2<da^2>, da = (dx + i dy)/sqrt(2).
// All representations carry the same information; purity is 1/sqrt(det M) in
// either matrix form and sqrt(D) in exponent form.
#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "errors.hpp"

namespace covkit {

// a b - c^2 (or the matrix determinant) at or below this, relative to the
// competing terms, counts as degenerate/singular: the state has no density.
inline constexpr double kDegeneracyTol = 1e-12;

// Slack for the purity <= 1 boundary: det M >= 1 - kPhysicalityEps is
// accepted as physical, so roundoff cannot flip a pure state to unphysical.
inline constexpr double kPhysicalityEps = 1e-9;

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace detail

template <typename Scalar = double>
struct PhasePoint {
  Scalar x{};
  Scalar y{};
};

// Exponent parameters of a single-oscillator Wigner function. a, b must be
// positive and a b > c^2 for the state to be normalizable; a b - c^2 <= 1
// additionally holds for anything physical (purity <= 1). Mean values are
// carried as metadata only - they never enter second moments or purity.
template <typename Scalar = double>
struct GaussianParams {
  Scalar a{1};
  Scalar b{1};
  Scalar c{0};
  Scalar mean_x{0};
  Scalar mean_y{0};

  Scalar normal_form_det() const { return a * b - c * c; }
};

// Which pair of real quadratures a 2x2 covariance matrix refers to.
enum class QuadratureBasis {
  IntracavityXY,   // instantaneous x, y of a single oscillator
  SpectralPQ,      // cos/sin components q, p of one spectral bin
  SpectralXYPair,  // collective X, Y of a +/- spectral bin pair (complex-valued)
};

inline const char* to_string(QuadratureBasis b) {
  switch (b) {
    case QuadratureBasis::IntracavityXY: return "INTRACAVITY_XY";
    case QuadratureBasis::SpectralPQ: return "SPECTRAL_PQ";
    case QuadratureBasis::SpectralXYPair: return "SPECTRAL_XY_PAIR";
  }
  return "?";
}

// Doubled second moments of two real quadratures; the vacuum is the identity.
template <typename Scalar = double>
struct QuadratureCM {
  Scalar m_xx{1};  // 2<dx^2>
  Scalar m_yy{1};  // 2<dy^2>
  Scalar m_xy{0};  // 2<dx dy>
  QuadratureBasis basis{QuadratureBasis::IntracavityXY};

  Scalar det() const { return m_xx * m_yy - m_xy * m_xy; }

  Eigen::Matrix<Scalar, 2, 2> matrix() const {
    Eigen::Matrix<Scalar, 2, 2> m;
    m << m_xx, m_xy, m_xy, m_yy;
    return m;
  }
};

// Same state in terms of the complex amplitude da = (dx + i dy)/sqrt(2):
// m_abs = 2<|da|^2> (real), m_aa = 2<da^2> (complex). det = m_abs^2 - |m_aa|^2
// equals the quadrature-form determinant.
template <typename Scalar = double>
struct AmplitudeCM {
  Scalar m_abs{1};
  std::complex<Scalar> m_aa{0, 0};

  Scalar det() const { return m_abs * m_abs - std::norm(m_aa); }
};

// What validate_physicality reports. purity is absent when the parameters do
// not describe a normalizable density at all.
template <typename Scalar = double>
struct PhysicalityReport {
  bool normalizable{false};
  bool physical{false};
  std::optional<Scalar> purity{};
};

// -- validation ---------------------------------------------------------------

template <typename Scalar>
void validate(const GaussianParams<Scalar>& p) {
  if (!(std::isfinite(static_cast<double>(p.a)) && std::isfinite(static_cast<double>(p.b)) &&
        std::isfinite(static_cast<double>(p.c)))) {
    throw InvariantViolation("gaussian params: a, b, c must be finite");
  }
  if (!(p.a > Scalar(0)) || !(p.b > Scalar(0))) {
    throw InvariantViolation("gaussian params: a and b must be positive (got a=" +
                             detail::num(static_cast<double>(p.a)) +
                             ", b=" + detail::num(static_cast<double>(p.b)) + ")");
  }
  const Scalar d = p.normal_form_det();
  const Scalar scale = std::max(p.a * p.b, p.c * p.c);
  if (!(d > Scalar(kDegeneracyTol) * scale)) {
    throw DegenerateParams("gaussian params: a b - c^2 = " + detail::num(static_cast<double>(d)) +
                           " is degenerate (no normalizable density)");
  }
}

template <typename Scalar>
void validate(const QuadratureCM<Scalar>& m) {
  if (!(std::isfinite(static_cast<double>(m.m_xx)) && std::isfinite(static_cast<double>(m.m_yy)) &&
        std::isfinite(static_cast<double>(m.m_xy)))) {
    throw InvariantViolation("quadrature cm: entries must be finite");
  }
  if (!(m.m_xx > Scalar(0)) || !(m.m_yy > Scalar(0))) {
    throw InvariantViolation("quadrature cm: m_xx and m_yy must be positive (got m_xx=" +
                             detail::num(static_cast<double>(m.m_xx)) +
                             ", m_yy=" + detail::num(static_cast<double>(m.m_yy)) + ")");
  }
  const Scalar d = m.det();
  const Scalar scale = std::max(m.m_xx * m.m_yy, m.m_xy * m.m_xy);
  if (!(d > Scalar(kDegeneracyTol) * scale)) {
    throw SingularCM("quadrature cm: det = " + detail::num(static_cast<double>(d)) +
                     " is singular");
  }
}

template <typename Scalar>
void validate(const AmplitudeCM<Scalar>& m) {
  if (!(std::isfinite(static_cast<double>(m.m_abs)) &&
        std::isfinite(static_cast<double>(m.m_aa.real())) &&
        std::isfinite(static_cast<double>(m.m_aa.imag())))) {
    throw InvariantViolation("amplitude cm: entries must be finite");
  }
  if (!(m.m_abs > Scalar(0))) {
    throw InvariantViolation("amplitude cm: m_abs must be positive (got " +
                             detail::num(static_cast<double>(m.m_abs)) + ")");
  }
  const Scalar d = m.det();
  const Scalar scale = std::max(m.m_abs * m.m_abs, std::norm(m.m_aa));
  if (!(d > Scalar(kDegeneracyTol) * scale)) {
    throw SingularCM("amplitude cm: det = " + detail::num(static_cast<double>(d)) +
                     " is singular");
  }
}

// Physical (quantum-realizable) means det M >= 1, i.e. purity <= 1, up to slack.
template <typename Scalar>
bool is_physical(const GaussianParams<Scalar>& p) {
  validate(p);
  return p.normal_form_det() <= Scalar(1) + Scalar(kPhysicalityEps);
}

template <typename Scalar>
bool is_physical(const QuadratureCM<Scalar>& m) {
  validate(m);
  return m.det() >= Scalar(1) - Scalar(kPhysicalityEps);
}

template <typename Scalar>
bool is_physical(const AmplitudeCM<Scalar>& m) {
  validate(m);
  return m.det() >= Scalar(1) - Scalar(kPhysicalityEps);
}

// -- representation changes ---------------------------------------------------

// Second moments from exponent parameters: the covariance matrix is the
// inverse of the exponent matrix, so M = [[b, c], [c, a]] / (a b - c^2) and
// det M = 1/(a b - c^2).
template <typename Scalar>
QuadratureCM<Scalar> moments_from_params(
    const GaussianParams<Scalar>& p,
    QuadratureBasis basis = QuadratureBasis::IntracavityXY) {
  validate(p);
  const Scalar d = p.normal_form_det();
  return QuadratureCM<Scalar>{p.b / d, p.a / d, p.c / d, basis};
}

template <typename Scalar>
GaussianParams<Scalar> params_from_quadrature_cm(const QuadratureCM<Scalar>& m) {
  validate(m);
  const Scalar d = m.det();
  return GaussianParams<Scalar>{m.m_yy / d, m.m_xx / d, m.m_xy / d};
}

// Linear repackaging of the same moments: 2<|da|^2> = (m_xx + m_yy)/2,
// 2<da^2> = (m_xx - m_yy)/2 + i m_xy.
template <typename Scalar>
AmplitudeCM<Scalar> amplitude_cm_from_quadrature_cm(const QuadratureCM<Scalar>& m) {
  validate(m);
  return AmplitudeCM<Scalar>{(m.m_xx + m.m_yy) / Scalar(2),
                             {(m.m_xx - m.m_yy) / Scalar(2), m.m_xy}};
}

template <typename Scalar>
QuadratureCM<Scalar> quadrature_cm_from_amplitude_cm(
    const AmplitudeCM<Scalar>& m,
    QuadratureBasis basis = QuadratureBasis::IntracavityXY) {
  validate(m);
  return QuadratureCM<Scalar>{m.m_abs + m.m_aa.real(), m.m_abs - m.m_aa.real(),
                              m.m_aa.imag(), basis};
}

template <typename Scalar>
AmplitudeCM<Scalar> amplitude_cm_from_params(const GaussianParams<Scalar>& p) {
  return amplitude_cm_from_quadrature_cm(moments_from_params(p));
}

template <typename Scalar>
GaussianParams<Scalar> params_from_amplitude_cm(const AmplitudeCM<Scalar>& m) {
  validate(m);
  const Scalar d = m.det();
  // a + b = 2 m_abs / det;  (a - b)/2 + i c = -conj(m_aa) / det.
  const Scalar half_sum = m.m_abs / d;
  const std::complex<Scalar> s = -std::conj(m.m_aa) / d;
  return GaussianParams<Scalar>{half_sum + s.real(), half_sum - s.real(), s.imag()};
}

// -- Wigner density and purity ------------------------------------------------

template <typename Scalar>
Scalar wigner_eval(const GaussianParams<Scalar>& p, const PhasePoint<Scalar>& pt) {
  validate(p);
  const Scalar dx = pt.x - p.mean_x;
  const Scalar dy = pt.y - p.mean_y;
  const Scalar d = p.normal_form_det();
  using std::exp;
  using std::sqrt;
  return Scalar(2) / Scalar(EIGEN_PI) * sqrt(d) *
         exp(-(p.a * dx * dx + p.b * dy * dy - Scalar(2) * p.c * dx * dy));
}

// Same density as a function of the complex amplitude deviation
// da = (dx + i dy)/sqrt(2); agrees pointwise with wigner_eval.
template <typename Scalar>
Scalar wigner_eval_amplitude(const GaussianParams<Scalar>& p, std::complex<Scalar> dalpha) {
  validate(p);
  const Scalar d = p.normal_form_det();
  const std::complex<Scalar> s{(p.a - p.b) / Scalar(2), p.c};
  const Scalar expo = (p.a + p.b) * std::norm(dalpha) +
                      Scalar(2) * (s * dalpha * dalpha).real();
  using std::exp;
  using std::sqrt;
  return Scalar(2) / Scalar(EIGEN_PI) * sqrt(d) * exp(-expo);
}

// Purity P = tr(rho^2) of a single oscillator: sqrt(a b - c^2), equivalently
// 1/sqrt(det M) in either covariance form.
template <typename Scalar>
Scalar purity(const GaussianParams<Scalar>& p) {
  validate(p);
  using std::sqrt;
  return sqrt(p.normal_form_det());
}

template <typename Scalar>
Scalar purity(const QuadratureCM<Scalar>& m) {
  validate(m);
  using std::sqrt;
  return Scalar(1) / sqrt(m.det());
}

template <typename Scalar>
Scalar purity(const AmplitudeCM<Scalar>& m) {
  validate(m);
  using std::sqrt;
  return Scalar(1) / sqrt(m.det());
}

// Non-throwing classification: can these parameters be normalized at all, and
// if so, do they respect the quantum bound det M >= 1 (purity <= 1)?
template <typename Scalar>
PhysicalityReport<Scalar> validate_physicality(const GaussianParams<Scalar>& p) {
  PhysicalityReport<Scalar> r;
  if (!(std::isfinite(static_cast<double>(p.a)) && std::isfinite(static_cast<double>(p.b)) &&
        std::isfinite(static_cast<double>(p.c))) ||
      !(p.a > Scalar(0)) || !(p.b > Scalar(0))) {
    return r;
  }
  const Scalar d = p.normal_form_det();
  const Scalar scale = std::max(p.a * p.b, p.c * p.c);
  if (!(d > Scalar(kDegeneracyTol) * scale)) {
    return r;
  }
  r.normalizable = true;
  using std::sqrt;
  r.purity = sqrt(d);
  r.physical = d <= Scalar(1) + Scalar(kPhysicalityEps);
  return r;
}

}  // namespace covkit
