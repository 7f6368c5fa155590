// Shared helpers for the test suite: a brute-force moment integrator that is
// independent of the covariance formulas under test, and seeded generators
// for random physical states.
#pragma once

#include <cmath>
#include <random>

#include <covkit/gaussian.hpp>
#include <covkit/multimode.hpp>

namespace testsupport {

// Doubled moments of a single-oscillator Wigner density by direct midpoint
// quadrature; deliberately ignorant of the closed-form inverse.
struct GridMoments {
  double norm;  // integral of W d2alpha (= dx dy / 2)
  double m_xx;  // 2<dx^2>
  double m_yy;
  double m_xy;
};

inline GridMoments brute_force_moments(const covkit::GaussianParams<double>& p, int n = 501,
                                       double k = 10.0) {
  const double d = p.a * p.b - p.c * p.c;
  const double sx = std::sqrt(p.b / (2.0 * d));
  const double sy = std::sqrt(p.a / (2.0 * d));
  const double hx = 2.0 * k * sx / n;
  const double hy = 2.0 * k * sy / n;
  double s = 0, sxx = 0, syy = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = -k * sx + (i + 0.5) * hx;
    for (int j = 0; j < n; ++j) {
      const double y = -k * sy + (j + 0.5) * hy;
      const double w =
          covkit::wigner_eval(p, covkit::PhasePoint<double>{x + p.mean_x, y + p.mean_y});
      s += w;
      sxx += w * x * x;
      syy += w * y * y;
      sxy += w * x * y;
    }
  }
  const double cell = hx * hy;
  return {0.5 * s * cell, sxx * cell, syy * cell, sxy * cell};
}

// Random normalizable single-oscillator parameters, physical unless asked
// otherwise. det_min keeps jackknife replicates and inverses well away from
// the degeneracy tolerance.
inline covkit::GaussianParams<double> random_params(std::mt19937_64& rng, bool physical = true,
                                                    double det_min = 0.05) {
  std::uniform_real_distribution<double> log_ab(std::log(0.1), std::log(10.0));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    const double a = std::exp(log_ab(rng));
    const double b = std::exp(log_ab(rng));
    const double c = (2.0 * unit(rng) - 1.0) * 0.9 * std::sqrt(a * b);
    const double det = a * b - c * c;
    if (det < det_min) continue;
    if (physical && det > 1.0) continue;
    return {a, b, c};
  }
}

inline covkit::TwoModeGaussianParams<double> random_two_mode_params(std::mt19937_64& rng,
                                                                    bool physical = true,
                                                                    double det_min = 0.05) {
  const auto p = random_params(rng, physical, det_min);
  return {p.a, p.b, p.c};
}

// Random valid collective-pair matrix (not necessarily physical).
inline covkit::XYPairCM<double> random_xy_cm(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> diag(0.2, 5.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    const double m_xx = diag(rng);
    const double m_yy = diag(rng);
    const double m_xy = (2.0 * unit(rng) - 1.0) * 0.9 * std::sqrt(m_xx * m_yy);
    if (m_xx * m_yy - m_xy * m_xy < 0.05) continue;
    return {m_xx, m_yy, m_xy, 1};
  }
}

}  // namespace testsupport
