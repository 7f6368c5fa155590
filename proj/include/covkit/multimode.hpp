// Spectral bins of a stationary field and +/- bin pairs.
//
// A stationary run decomposes into spectral bins; bin W (an integer index)
// carries cos/sin quadratures (q, p). Bins with W1 != -W2 are uncorrelated,
// so a joint 4x4 covariance matrix is block diagonal and its purity is the
// product of the single-bin purities: 1/sqrt(det M4).
//
// Bins +W and -W of one stationary process ARE correlated. The collective
// complex quadratures
//
//     X = (A_+ + conj(A_-))/sqrt(2),   Y = (A_+ - conj(A_-))/(i sqrt(2)),
//     A_+- = (q_+- + i p_+-)/sqrt(2)
//
// diagonalize that correlation: the pair state is an isotropic Gaussian in
// (Re X, Im X, Re Y, Im Y) described by a 2x2 matrix of doubled moments. Its
// purity law has NO square root - purity = 1/det(2x2) - because the 2x2
// stands in for a genuine 4x4 with determinant det(2x2)^2; see
// expand_xy_to_full_pq_cm for the explicit reconciliation.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "errors.hpp"
#include "gaussian.hpp"

namespace covkit {

using ModeIndex = std::int32_t;  // signed spectral bin; -W is the mirror bin of W

// cos/sin quadrature sample of one spectral bin.
template <typename Scalar = double>
struct SpectralQuadratures {
  Scalar q{};
  Scalar p{};
  ModeIndex mode{0};
};

// Collective quadratures of a (+W, -W) bin pair; mode stores +W (> 0).
template <typename Scalar = double>
struct XYPairQuadratures {
  std::complex<Scalar> x{};
  std::complex<Scalar> y{};
  ModeIndex mode{0};
};

// Joint doubled-moment matrix of two distinct bins: per-bin 2x2 blocks plus a
// 2x2 cross block N = [2<dq1 dq2>, 2<dq1 dp2>; 2<dp1 dq2>, 2<dp1 dp2>]. The
// assembled 4x4 over (q1, p1, q2, p2) is [[M1, N], [N^T, M2]].
template <typename Scalar = double>
struct TwoModeCM {
  QuadratureCM<Scalar> block_1{1, 1, 0, QuadratureBasis::SpectralPQ};
  QuadratureCM<Scalar> block_2{1, 1, 0, QuadratureBasis::SpectralPQ};
  Eigen::Matrix<Scalar, 2, 2> cross = Eigen::Matrix<Scalar, 2, 2>::Zero();
  ModeIndex mode_1{0};
  ModeIndex mode_2{0};
  // set when assembly discarded a nonzero cross block because the bins are
  // not a +/- pair and stationarity forces their correlation to vanish
  bool cross_zeroed{false};

  Eigen::Matrix<Scalar, 4, 4> matrix() const {
    Eigen::Matrix<Scalar, 4, 4> m;
    m.template topLeftCorner<2, 2>() = block_1.matrix();
    m.template bottomRightCorner<2, 2>() = block_2.matrix();
    m.template topRightCorner<2, 2>() = cross;
    m.template bottomLeftCorner<2, 2>() = cross.transpose();
    return m;
  }
};

// Doubled moments of the collective pair quadratures:
// m_xx = 2<|dX|^2>, m_yy = 2<|dY|^2>, m_xy = 2 Re<dX conj(dY)> (real by
// stationarity). mode stores the +W member of the pair.
template <typename Scalar = double>
struct XYPairCM {
  Scalar m_xx{1};
  Scalar m_yy{1};
  Scalar m_xy{0};
  ModeIndex mode{1};

  Scalar det() const { return m_xx * m_yy - m_xy * m_xy; }

  Eigen::Matrix<Scalar, 2, 2> matrix() const {
    Eigen::Matrix<Scalar, 2, 2> m;
    m << m_xx, m_xy, m_xy, m_yy;
    return m;
  }
};

// Exponent parameters of the pair Wigner density
//   W(X, Y) = (4/pi^2) D exp(-a|dX|^2 - b|dY|^2 + 2c Re(dX conj(dY))),
//   D = a b - c^2.
template <typename Scalar = double>
struct TwoModeGaussianParams {
  Scalar a{1};
  Scalar b{1};
  Scalar c{0};

  Scalar normal_form_det() const { return a * b - c * c; }
};

// -- validation ---------------------------------------------------------------

template <typename Scalar>
void validate(const XYPairCM<Scalar>& m) {
  if (!(m.mode > 0)) {
    throw InvariantViolation("xy pair cm: mode must be the positive pair member (got " +
                             std::to_string(m.mode) + ")");
  }
  if (!(std::isfinite(static_cast<double>(m.m_xx)) && std::isfinite(static_cast<double>(m.m_yy)) &&
        std::isfinite(static_cast<double>(m.m_xy)))) {
    throw InvariantViolation("xy pair cm: entries must be finite");
  }
  if (!(m.m_xx > Scalar(0)) || !(m.m_yy > Scalar(0))) {
    throw InvariantViolation("xy pair cm: m_xx and m_yy must be positive (got m_xx=" +
                             detail::num(static_cast<double>(m.m_xx)) +
                             ", m_yy=" + detail::num(static_cast<double>(m.m_yy)) + ")");
  }
  const Scalar d = m.det();
  const Scalar scale = std::max(m.m_xx * m.m_yy, m.m_xy * m.m_xy);
  if (!(d > Scalar(kDegeneracyTol) * scale)) {
    throw SingularCM("xy pair cm: det = " + detail::num(static_cast<double>(d)) + " is singular");
  }
}

template <typename Scalar>
void validate(const TwoModeGaussianParams<Scalar>& p) {
  if (!(std::isfinite(static_cast<double>(p.a)) && std::isfinite(static_cast<double>(p.b)) &&
        std::isfinite(static_cast<double>(p.c)))) {
    throw InvariantViolation("two-mode params: a, b, c must be finite");
  }
  if (!(p.a > Scalar(0)) || !(p.b > Scalar(0))) {
    throw InvariantViolation("two-mode params: a and b must be positive (got a=" +
                             detail::num(static_cast<double>(p.a)) +
                             ", b=" + detail::num(static_cast<double>(p.b)) + ")");
  }
  const Scalar d = p.normal_form_det();
  const Scalar scale = std::max(p.a * p.b, p.c * p.c);
  if (!(d > Scalar(kDegeneracyTol) * scale)) {
    throw DegenerateParams("two-mode params: a b - c^2 = " +
                           detail::num(static_cast<double>(d)) +
                           " is degenerate (no normalizable density)");
  }
}

template <typename Scalar>
void validate(const TwoModeCM<Scalar>& m) {
  if (m.block_1.basis != QuadratureBasis::SpectralPQ ||
      m.block_2.basis != QuadratureBasis::SpectralPQ) {
    throw InvariantViolation("two-mode cm: both blocks must be SPECTRAL_PQ");
  }
  validate(m.block_1);
  validate(m.block_2);
  if (m.mode_1 == m.mode_2) {
    throw ModeMismatch("two-mode cm: bins must be distinct (got " + std::to_string(m.mode_1) +
                       " twice)");
  }
  if (!m.cross.allFinite()) {
    throw InvariantViolation("two-mode cm: cross block must be finite");
  }
  Eigen::LLT<Eigen::Matrix<Scalar, 4, 4>> llt(m.matrix());
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("two-mode cm: assembled 4x4 matrix is not positive definite");
  }
}

template <typename Scalar>
bool is_physical(const XYPairCM<Scalar>& m) {
  validate(m);
  return m.det() >= Scalar(1) - Scalar(kPhysicalityEps);
}

// -- collective pair quadratures ----------------------------------------------

// Build the collective (X, Y) of a (+W, -W) bin pair from per-bin (q, p).
template <typename Scalar>
XYPairQuadratures<Scalar> xy_from_pq(const SpectralQuadratures<Scalar>& plus,
                                     const SpectralQuadratures<Scalar>& minus) {
  if (!(plus.mode > 0)) {
    throw ModeMismatch("xy_from_pq: first argument must be the positive bin (got " +
                       std::to_string(plus.mode) + ")");
  }
  if (minus.mode != -plus.mode) {
    throw ModeMismatch("xy_from_pq: bins " + std::to_string(plus.mode) + " and " +
                       std::to_string(minus.mode) + " are not a +/- pair");
  }
  XYPairQuadratures<Scalar> r;
  r.x = {(plus.q + minus.q) / Scalar(2), (plus.p - minus.p) / Scalar(2)};
  r.y = {(plus.p + minus.p) / Scalar(2), (minus.q - plus.q) / Scalar(2)};
  r.mode = plus.mode;
  return r;
}

// Inverse of xy_from_pq; returns (+W, -W) samples.
template <typename Scalar>
std::pair<SpectralQuadratures<Scalar>, SpectralQuadratures<Scalar>> pq_from_xy(
    const XYPairQuadratures<Scalar>& pair) {
  if (!(pair.mode > 0)) {
    throw ModeMismatch("pq_from_xy: pair mode must be positive (got " +
                       std::to_string(pair.mode) + ")");
  }
  SpectralQuadratures<Scalar> plus{pair.x.real() - pair.y.imag(),
                                   pair.x.imag() + pair.y.real(), pair.mode};
  SpectralQuadratures<Scalar> minus{pair.x.real() + pair.y.imag(),
                                    pair.y.real() - pair.x.imag(),
                                    static_cast<ModeIndex>(-pair.mode)};
  return {plus, minus};
}

// -- joint matrices for distinct bins -------------------------------------------

// Assemble the joint matrix of two distinct bins. For W1 != -W2 stationarity
// forces the cross correlation to vanish, so a nonzero cross block is
// discarded (cross_zeroed records that). A (+W, -W) pair keeps its cross.
template <typename Scalar, typename Derived>
TwoModeCM<Scalar> assemble_two_mode_cm(const QuadratureCM<Scalar>& m1,
                                       const QuadratureCM<Scalar>& m2,
                                       const Eigen::MatrixBase<Derived>& cross,
                                       ModeIndex mode_1, ModeIndex mode_2) {
  static_assert(Derived::RowsAtCompileTime == 2 && Derived::ColsAtCompileTime == 2,
                "cross block must be 2x2");
  TwoModeCM<Scalar> r;
  r.block_1 = m1;
  r.block_2 = m2;
  r.mode_1 = mode_1;
  r.mode_2 = mode_2;
  if (mode_1 != -mode_2 || mode_1 == 0) {
    r.cross.setZero();
    r.cross_zeroed = !cross.isZero(Scalar(0));
  } else {
    r.cross = cross;
  }
  validate(r);
  return r;
}

namespace detail {

template <typename Scalar>
bool exactly_zero(const Eigen::Matrix<Scalar, 2, 2>& m) {
  return m(0, 0) == Scalar(0) && m(0, 1) == Scalar(0) && m(1, 0) == Scalar(0) &&
         m(1, 1) == Scalar(0);
}

}  // namespace detail

// Purity of two uncorrelated bins: same law as a single oscillator applied to
// the 4x4, 1/sqrt(det M4) = 1/sqrt(det M1 det M2) = P1 P2. A correlated
// (+W, -W) pair is refused: its purity must be computed in the collective
// X/Y basis (purity_xy_pair), where the law is 1/det.
template <typename Scalar>
Scalar purity_pq_pair(const TwoModeCM<Scalar>& m) {
  validate(m);
  if (m.mode_1 == -m.mode_2 && !detail::exactly_zero(m.cross)) {
    throw CorrelatedPairNotSupported(
        "purity of a correlated (+W, -W) pair is not defined on per-bin q/p moments; "
        "re-measure in the collective X/Y basis and use the 1/det law");
  }
  using std::sqrt;
  return Scalar(1) / sqrt(m.matrix().determinant());
}

// -- the collective pair state --------------------------------------------------

// Doubled moments of (X, Y) from exponent parameters; same inverse pattern as
// a single oscillator: m_xx = b/D, m_yy = a/D, m_xy = c/D, det = 1/D.
template <typename Scalar>
XYPairCM<Scalar> xy_cm_from_two_mode_params(const TwoModeGaussianParams<Scalar>& p,
                                            ModeIndex mode = 1) {
  validate(p);
  const Scalar d = p.normal_form_det();
  XYPairCM<Scalar> r{p.b / d, p.a / d, p.c / d, mode};
  validate(r);
  return r;
}

template <typename Scalar>
TwoModeGaussianParams<Scalar> two_mode_params_from_xy_cm(const XYPairCM<Scalar>& m) {
  validate(m);
  const Scalar d = m.det();
  return TwoModeGaussianParams<Scalar>{m.m_yy / d, m.m_xx / d, m.m_xy / d};
}

// Pair Wigner density at complex deviations (dX, dY) from the means.
template <typename Scalar>
Scalar two_mode_wigner_eval(const TwoModeGaussianParams<Scalar>& p, std::complex<Scalar> dx,
                            std::complex<Scalar> dy) {
  validate(p);
  const Scalar d = p.normal_form_det();
  const Scalar expo = -p.a * std::norm(dx) - p.b * std::norm(dy) +
                      Scalar(2) * p.c * (dx * std::conj(dy)).real();
  using std::exp;
  return Scalar(4) / Scalar(EIGEN_PI * EIGEN_PI) * d * exp(expo);
}

// Pair purity: 1/det of the 2x2 collective matrix - no square root. The 2x2
// abbreviates a 4x4 with det M4 = (det)^2, so this IS the single-oscillator
// law in disguise; using 1/sqrt(det 2x2) here is the classic mistake.
template <typename Scalar>
Scalar purity_xy_pair(const XYPairCM<Scalar>& m) {
  validate(m);
  return Scalar(1) / m.det();
}

template <typename Scalar>
Scalar purity_xy_pair(const TwoModeGaussianParams<Scalar>& p) {
  validate(p);
  return p.normal_form_det();
}

// Expand the 2x2 collective matrix into the full 4x4 over (q_+, p_+, q_-, p_-).
// Both per-bin blocks come out isotropic, s I with s = (m_xx + m_yy)/2, and
// the (+,-) cross block is N = [[d, m_xy], [m_xy, -d]] with d = (m_xx - m_yy)/2.
// det M4 = (m_xx m_yy - m_xy^2)^2 exactly, which reconciles the two purity
// laws: 1/sqrt(det M4) = 1/det(2x2).
template <typename Scalar>
TwoModeCM<Scalar> expand_xy_to_full_pq_cm(const XYPairCM<Scalar>& m) {
  validate(m);
  const Scalar s = (m.m_xx + m.m_yy) / Scalar(2);
  const Scalar d = (m.m_xx - m.m_yy) / Scalar(2);
  TwoModeCM<Scalar> r;
  r.block_1 = QuadratureCM<Scalar>{s, s, Scalar(0), QuadratureBasis::SpectralPQ};
  r.block_2 = r.block_1;
  r.cross << d, m.m_xy, m.m_xy, -d;
  r.mode_1 = m.mode;
  r.mode_2 = static_cast<ModeIndex>(-m.mode);
  validate(r);
  return r;
}

}  // namespace covkit
