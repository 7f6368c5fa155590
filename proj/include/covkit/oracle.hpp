// Brute-force purity checks by direct phase-space integration.
//
// Purity is also tr(rho^2), i.e. a phase-space integral of the squared Wigner
// density: (pi/2) Int W^2 dx dy for one oscillator and (pi^2/4) Int W^2 d4u
// over (Re X, Im X, Re Y, Im Y) for a +/- bin pair. These integrals know
// nothing about determinant shortcuts, so they are the ground truth both
// closed-form laws are validated against.
//
// Convention errors (stray factors of 2 or pi) are the dominant failure mode
// of such checks, so every run first integrates the VACUUM on the identical
// grid (or with the identical estimator) and must recover purity 1 before the
// target result is reported; a failed self-test raises GridTooCoarse.
//
// The tensor grid is a midpoint rule on a box of +-half_width_sigmas per
// axis, scaled by the larger of the target's and the vacuum's marginal sigma
// on that axis, so anisotropic (squeezed) targets keep both themselves and
// the calibration state covered. Grids whose total point count exceeds the
// budget raise BudgetExceeded; Monte Carlo importance sampling (sampling the
// target density itself) is the fallback for the four-dimensional pair case.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "errors.hpp"
#include "gaussian.hpp"
#include "multimode.hpp"
#include "parallel.hpp"
#include "philox.hpp"

namespace covkit::oracle {

enum class IntegrationMethod { TensorGrid, MonteCarlo };

inline const char* to_string(IntegrationMethod m) {
  return m == IntegrationMethod::TensorGrid ? "tensor-grid" : "monte-carlo";
}

// Tolerated deviation of the vacuum self-test from 1 on a tensor grid.
inline constexpr double kVacuumGateTol = 1e-6;
// Monte Carlo self-test gate, in standard errors of the vacuum estimate.
inline constexpr double kVacuumGateSigmas = 5.0;

struct GridSpec {
  IntegrationMethod method{IntegrationMethod::TensorGrid};
  double half_width_sigmas{8.0};
  int points_per_axis{401};
  std::size_t point_budget{250'000'000};  // max tensor-grid evaluations of the target
  std::size_t mc_samples{10'000'000};
  std::uint64_t mc_seed{0x5eedc0de};
  int threads{0};  // 0: COVKIT_THREADS or hardware default

  static GridSpec single_mode_default() { return {}; }

  static GridSpec two_mode_default() {
    GridSpec g;
    g.points_per_axis = 81;  // 81^4 ~ 4.3e7 evaluations
    return g;
  }
};

inline void validate(const GridSpec& g) {
  if (!(std::isfinite(g.half_width_sigmas)) || !(g.half_width_sigmas > 0)) {
    throw InvariantViolation("grid spec: half_width_sigmas must be positive");
  }
  if (g.points_per_axis < 51 || g.points_per_axis % 2 == 0) {
    throw InvariantViolation("grid spec: points_per_axis must be odd and at least 51 (got " +
                             std::to_string(g.points_per_axis) + ")");
  }
  if (g.point_budget < 1) {
    throw InvariantViolation("grid spec: point_budget must be positive");
  }
  if (g.mc_samples < 1000) {
    throw InvariantViolation("grid spec: mc_samples must be at least 1000");
  }
}

struct OracleResult {
  double value{0};
  double std_error{0};  // Monte Carlo only; 0 for a tensor grid
  double self_test{0};  // vacuum purity recovered by the identical procedure
  IntegrationMethod method{IntegrationMethod::TensorGrid};
  std::size_t evaluations{0};
};

namespace detail {

// marginal sigma of the vacuum Wigner density, per real axis
inline constexpr double kVacuumSigma = 0.70710678118654752440;

struct Axis {
  double half_width;
  double step;
  // midpoint abscissa i of n points on [-half_width, half_width]
  double at(int i) const { return -half_width + (static_cast<double>(i) + 0.5) * step; }
};

inline Axis make_axis(double target_sigma, const GridSpec& g) {
  const double h = g.half_width_sigmas * std::max(target_sigma, kVacuumSigma);
  return {h, 2.0 * h / static_cast<double>(g.points_per_axis)};
}

// Resolution guard: the step must resolve the target's own width even when
// the box is dominated by the vacuum scale.
inline void check_resolution(const Axis& ax, double target_sigma) {
  if (ax.step > 0.5 * target_sigma) {
    throw GridTooCoarse("tensor grid: step " + covkit::detail::num(ax.step) +
                        " does not resolve a marginal sigma of " +
                        covkit::detail::num(target_sigma) + "; increase points_per_axis");
  }
}

template <typename Eval>
double grid_sum_2d(const Axis& ax, const Axis& ay, int n, int threads, Eval&& eval) {
  std::vector<double> partials(static_cast<std::size_t>(n), 0.0);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t ix) {
    const double x = ax.at(static_cast<int>(ix));
    KahanSum acc;
    for (int iy = 0; iy < n; ++iy) acc.add(eval(x, ay.at(iy)));
    partials[ix] = acc.value();
  });
  return pairwise_sum(std::move(partials)) * ax.step * ay.step;
}

template <typename Eval>
double grid_sum_4d(const Axis& au, const Axis& av, int n, int threads, Eval&& eval) {
  std::vector<double> partials(static_cast<std::size_t>(n), 0.0);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i0) {
    const double u1 = au.at(static_cast<int>(i0));
    KahanSum acc;
    for (int i1 = 0; i1 < n; ++i1) {
      const double u2 = au.at(i1);
      for (int i2 = 0; i2 < n; ++i2) {
        const double v1 = av.at(i2);
        for (int i3 = 0; i3 < n; ++i3) acc.add(eval(u1, u2, v1, av.at(i3)));
      }
    }
    partials[i0] = acc.value();
  });
  const double cell = au.step * au.step * av.step * av.step;
  return pairwise_sum(std::move(partials)) * cell;
}

inline void check_vacuum_gate(double self_test, const std::string& what) {
  if (!(std::abs(self_test - 1.0) <= kVacuumGateTol)) {
    throw GridTooCoarse(what + ": vacuum self-test recovered purity " +
                        covkit::detail::num(self_test) +
                        " (|deviation| > 1e-6); refine the grid");
  }
}

// Chunked, deterministic Monte Carlo mean/stderr of eval(i) over n samples.
template <typename Eval>
std::pair<double, double> mc_mean(std::size_t n, int threads, Eval&& eval) {
  constexpr std::size_t kChunk = 1u << 16;
  const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> sums(n_chunks, 0.0);
  std::vector<double> sqsums(n_chunks, 0.0);
  parallel_for(n_chunks, threads, [&](std::size_t chunk) {
    const std::size_t lo = chunk * kChunk;
    const std::size_t hi = std::min(n, lo + kChunk);
    KahanSum s;
    KahanSum s2;
    for (std::size_t i = lo; i < hi; ++i) {
      const double v = eval(i);
      s.add(v);
      s2.add(v * v);
    }
    sums[chunk] = s.value();
    sqsums[chunk] = s2.value();
  });
  const double sum = pairwise_sum(std::move(sums));
  const double sqsum = pairwise_sum(std::move(sqsums));
  const double nn = static_cast<double>(n);
  const double mean = sum / nn;
  const double var = std::max(0.0, (sqsum - nn * mean * mean) / (nn - 1.0));
  return {mean, std::sqrt(var / nn)};
}

}  // namespace detail

// -- single oscillator ----------------------------------------------------------

// Int W d2alpha (d2alpha = dx dy / 2) on the target-adapted grid; equals 1
// for any valid parameters. Tensor grid only.
inline OracleResult normalization_integral_single(const GaussianParams<double>& p,
                                                  GridSpec g = GridSpec::single_mode_default()) {
  covkit::validate(p);
  validate(g);
  if (g.method != IntegrationMethod::TensorGrid) {
    throw InvariantViolation("normalization check is defined for the tensor grid only");
  }
  const int n = g.points_per_axis;
  const std::size_t total = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  if (total > g.point_budget) {
    throw BudgetExceeded("tensor grid needs " + std::to_string(total) +
                         " evaluations, budget is " + std::to_string(g.point_budget));
  }
  const int threads = resolve_thread_count(g.threads);
  const double d = p.normal_form_det();
  const detail::Axis ax = detail::make_axis(std::sqrt(p.b / (2.0 * d)), g);
  const detail::Axis ay = detail::make_axis(std::sqrt(p.a / (2.0 * d)), g);
  detail::check_resolution(ax, std::sqrt(p.b / (2.0 * d)));
  detail::check_resolution(ay, std::sqrt(p.a / (2.0 * d)));

  const GaussianParams<double> vac{};
  const double vac_norm = 0.5 * detail::grid_sum_2d(ax, ay, n, threads, [&](double x, double y) {
    return wigner_eval(vac, PhasePoint<double>{x, y});
  });
  detail::check_vacuum_gate(vac_norm, "normalization integral");

  const double norm = 0.5 * detail::grid_sum_2d(ax, ay, n, threads, [&](double x, double y) {
    return wigner_eval(p, PhasePoint<double>{x + p.mean_x, y + p.mean_y});
  });
  return {norm, 0.0, vac_norm, IntegrationMethod::TensorGrid, 2 * total};
}

// Purity (pi/2) Int W^2 dx dy, evaluated blind to the determinant law.
inline OracleResult purity_integral_single(const GaussianParams<double>& p,
                                           GridSpec g = GridSpec::single_mode_default()) {
  covkit::validate(p);
  validate(g);
  const double d = p.normal_form_det();
  const double sx = std::sqrt(p.b / (2.0 * d));
  const double sy = std::sqrt(p.a / (2.0 * d));
  const GaussianParams<double> vac{};

  if (g.method == IntegrationMethod::TensorGrid) {
    const int n = g.points_per_axis;
    const std::size_t total = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    if (total > g.point_budget) {
      throw BudgetExceeded("tensor grid needs " + std::to_string(total) +
                           " evaluations, budget is " + std::to_string(g.point_budget) +
                           "; reduce points_per_axis or switch to Monte Carlo");
    }
    const int threads = resolve_thread_count(g.threads);
    const detail::Axis ax = detail::make_axis(sx, g);
    const detail::Axis ay = detail::make_axis(sy, g);
    detail::check_resolution(ax, sx);
    detail::check_resolution(ay, sy);

    const double self = M_PI / 2.0 *
        detail::grid_sum_2d(ax, ay, n, threads, [&](double x, double y) {
          const double w = wigner_eval(vac, PhasePoint<double>{x, y});
          return w * w;
        });
    detail::check_vacuum_gate(self, "purity integral");

    const double val = M_PI / 2.0 *
        detail::grid_sum_2d(ax, ay, n, threads, [&](double x, double y) {
          const double w = wigner_eval(p, PhasePoint<double>{x + p.mean_x, y + p.mean_y});
          return w * w;
        });
    return {val, 0.0, self, IntegrationMethod::TensorGrid, 2 * total};
  }

  // Importance sampling from the state's own density: purity = pi E[W].
  const int threads = resolve_thread_count(g.threads);
  Eigen::Matrix2d sigma;
  sigma << p.b, p.c, p.c, p.a;
  sigma /= 2.0 * d;
  const Eigen::Matrix2d l = Eigen::LLT<Eigen::Matrix2d>(sigma).matrixL();

  const auto run = [&](const GaussianParams<double>& state, const Eigen::Matrix2d& chol,
                       std::uint32_t lane, std::size_t n_samp) {
    const rng::GaussianStream stream(g.mc_seed, lane, rng::kDomainOracle);
    return detail::mc_mean(n_samp, threads, [&](std::size_t i) {
      const auto z = stream.normal_pair(i);
      const double x = chol(0, 0) * z[0];
      const double y = chol(1, 0) * z[0] + chol(1, 1) * z[1];
      return M_PI * wigner_eval(state, PhasePoint<double>{x, y});
    });
  };

  const std::size_t n_self = std::min<std::size_t>(g.mc_samples, 1'000'000);
  const auto [self, self_se] = run(vac, Eigen::Matrix2d::Identity() * detail::kVacuumSigma, 0,
                                   n_self);
  if (!(std::abs(self - 1.0) <= kVacuumGateSigmas * self_se)) {
    throw GridTooCoarse("monte carlo purity: vacuum self-test " + covkit::detail::num(self) +
                        " deviates from 1 by more than " +
                        covkit::detail::num(kVacuumGateSigmas) + " standard errors");
  }
  const auto [val, se] = run(p, l, 1, g.mc_samples);
  return {val, se, self, IntegrationMethod::MonteCarlo, g.mc_samples + n_self};
}

// -- +/- bin pair -----------------------------------------------------------------

// Int W d2X d2Y / 4 over (Re X, Im X, Re Y, Im Y); equals 1 for any valid
// pair parameters. Tensor grid only.
inline OracleResult normalization_integral_two_mode(const TwoModeGaussianParams<double>& p,
                                                    GridSpec g = GridSpec::two_mode_default()) {
  covkit::validate(p);
  validate(g);
  if (g.method != IntegrationMethod::TensorGrid) {
    throw InvariantViolation("normalization check is defined for the tensor grid only");
  }
  const int n = g.points_per_axis;
  const std::size_t n2 = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  const std::size_t total = n2 * n2;
  if (total > g.point_budget) {
    throw BudgetExceeded("tensor grid needs " + std::to_string(total) +
                         " evaluations, budget is " + std::to_string(g.point_budget));
  }
  const int threads = resolve_thread_count(g.threads);
  const double d = p.normal_form_det();
  const double su = std::sqrt(p.b / (2.0 * d));
  const double sv = std::sqrt(p.a / (2.0 * d));
  const detail::Axis au = detail::make_axis(su, g);
  const detail::Axis av = detail::make_axis(sv, g);
  detail::check_resolution(au, su);
  detail::check_resolution(av, sv);

  const TwoModeGaussianParams<double> vac{};
  const auto w_of = [](const TwoModeGaussianParams<double>& s) {
    return [&s](double u1, double u2, double v1, double v2) {
      return two_mode_wigner_eval(s, std::complex<double>{u1, u2},
                                  std::complex<double>{v1, v2});
    };
  };
  const double vac_norm = 0.25 * detail::grid_sum_4d(au, av, n, threads, w_of(vac));
  detail::check_vacuum_gate(vac_norm, "pair normalization integral");
  const double norm = 0.25 * detail::grid_sum_4d(au, av, n, threads, w_of(p));
  return {norm, 0.0, vac_norm, IntegrationMethod::TensorGrid, 2 * total};
}

// Pair purity (pi^2/4) Int W^2 d4u, the ground truth for the 1/det law.
inline OracleResult purity_integral_two_mode(const TwoModeGaussianParams<double>& p,
                                             GridSpec g = GridSpec::two_mode_default()) {
  covkit::validate(p);
  validate(g);
  const double d = p.normal_form_det();
  const double su = std::sqrt(p.b / (2.0 * d));
  const double sv = std::sqrt(p.a / (2.0 * d));
  const TwoModeGaussianParams<double> vac{};

  if (g.method == IntegrationMethod::TensorGrid) {
    const int n = g.points_per_axis;
    const std::size_t n2 = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    const std::size_t total = n2 * n2;
    if (total > g.point_budget) {
      throw BudgetExceeded("tensor grid needs " + std::to_string(total) +
                           " evaluations, budget is " + std::to_string(g.point_budget) +
                           "; reduce points_per_axis or switch to Monte Carlo");
    }
    const int threads = resolve_thread_count(g.threads);
    const detail::Axis au = detail::make_axis(su, g);
    const detail::Axis av = detail::make_axis(sv, g);
    detail::check_resolution(au, su);
    detail::check_resolution(av, sv);

    const auto w2_of = [](const TwoModeGaussianParams<double>& s) {
      return [&s](double u1, double u2, double v1, double v2) {
        const double w = two_mode_wigner_eval(s, std::complex<double>{u1, u2},
                                              std::complex<double>{v1, v2});
        return w * w;
      };
    };
    const double self =
        M_PI * M_PI / 4.0 * detail::grid_sum_4d(au, av, n, threads, w2_of(vac));
    detail::check_vacuum_gate(self, "pair purity integral");
    const double val = M_PI * M_PI / 4.0 * detail::grid_sum_4d(au, av, n, threads, w2_of(p));
    return {val, 0.0, self, IntegrationMethod::TensorGrid, 2 * total};
  }

  // Importance sampling from the pair density itself: purity = pi^2 E[W].
  // (Re X, Re Y) and (Im X, Im Y) are iid with covariance [[b, c], [c, a]]/(2D).
  const int threads = resolve_thread_count(g.threads);
  Eigen::Matrix2d sector;
  sector << p.b, p.c, p.c, p.a;
  sector /= 2.0 * d;
  const Eigen::Matrix2d l = Eigen::LLT<Eigen::Matrix2d>(sector).matrixL();

  const auto run = [&](const TwoModeGaussianParams<double>& state, const Eigen::Matrix2d& chol,
                       std::uint32_t lane, std::size_t n_samp) {
    const rng::GaussianStream stream(g.mc_seed, lane, rng::kDomainOracle);
    return detail::mc_mean(n_samp, threads, [&](std::size_t i) {
      const auto z01 = stream.normal_pair(2 * i);
      const auto z23 = stream.normal_pair(2 * i + 1);
      const double u1 = chol(0, 0) * z01[0];
      const double v1 = chol(1, 0) * z01[0] + chol(1, 1) * z01[1];
      const double u2 = chol(0, 0) * z23[0];
      const double v2 = chol(1, 0) * z23[0] + chol(1, 1) * z23[1];
      return M_PI * M_PI * two_mode_wigner_eval(state, std::complex<double>{u1, u2},
                                                std::complex<double>{v1, v2});
    });
  };

  const std::size_t n_self = std::min<std::size_t>(g.mc_samples, 1'000'000);
  const auto [self, self_se] =
      run(vac, Eigen::Matrix2d::Identity() * detail::kVacuumSigma, 2, n_self);
  if (!(std::abs(self - 1.0) <= kVacuumGateSigmas * self_se)) {
    throw GridTooCoarse("monte carlo pair purity: vacuum self-test " +
                        covkit::detail::num(self) + " deviates from 1 by more than " +
                        covkit::detail::num(kVacuumGateSigmas) + " standard errors");
  }
  const auto [val, se] = run(p, l, 3, g.mc_samples);
  return {val, se, self, IntegrationMethod::MonteCarlo, g.mc_samples + n_self};
}

}  // namespace covkit::oracle
