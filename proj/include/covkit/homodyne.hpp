// Balanced-homodyne run simulator for stationary Gaussian fields.
//
// A SpectrumConfig lists independent solo bins and (+W, -W) pairs with their
// Gaussian parameters. sample_ensemble draws per-bin (q, p) records from the
// implied covariance matrices; every draw is a pure function of
// (seed, bin, sample index) through a counter-based generator, so ensembles
// are bit-identical for a given seed regardless of thread count.
//
// Estimators go the opposite way: sample-mean-subtracted doubled moments with
// jackknife standard errors over fixed blocks, so reconstructed parameters
// and purities come with propagated uncertainties.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "errors.hpp"
#include "gaussian.hpp"
#include "multimode.hpp"
#include "parallel.hpp"
#include "philox.hpp"

namespace covkit::homodyne {

// Jackknife blocks used by all estimators; estimates need n >= kNumBlocks.
inline constexpr std::size_t kNumBlocks = 100;

// Local oscillator quadrature amplitudes. A phase-theta LO of unit strength
// is (cos theta, sin theta).
struct LocalOscillator {
  double q_lo{1};
  double p_lo{0};

  static LocalOscillator from_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }
};

// Which bins to simulate and how many records to draw.
struct SpectrumConfig {
  std::uint64_t seed{0};
  std::size_t n_samples{0};
  std::map<ModeIndex, GaussianParams<double>> solo;          // independent bins
  std::map<ModeIndex, TwoModeGaussianParams<double>> pairs;  // +W -> pair params, W > 0
};

inline void validate(const SpectrumConfig& cfg) {
  if (cfg.n_samples < 1) {
    throw ConfigInvalid("spectrum config: n_samples must be at least 1");
  }
  if (cfg.solo.empty() && cfg.pairs.empty()) {
    throw ConfigInvalid("spectrum config: no bins configured");
  }
  for (const auto& [bin, params] : cfg.solo) {
    try {
      covkit::validate(params);
    } catch (const Error& e) {
      throw ConfigInvalid("spectrum config: solo bin " + std::to_string(bin) + ": " + e.what());
    }
  }
  for (const auto& [bin, params] : cfg.pairs) {
    if (bin <= 0) {
      throw ConfigInvalid("spectrum config: pair bin must be positive (got " +
                          std::to_string(bin) + ")");
    }
    if (cfg.solo.count(bin) || cfg.solo.count(-bin)) {
      throw ConfigInvalid("spectrum config: bin " + std::to_string(bin) +
                          " appears both as pair and solo");
    }
    try {
      covkit::validate(params);
    } catch (const Error& e) {
      throw ConfigInvalid("spectrum config: pair bin " + std::to_string(bin) + ": " + e.what());
    }
  }
}

// Stable fingerprint of a config (FNV-1a over a canonical rendering); stored
// with ensembles and estimate documents so results can be traced to inputs.
inline std::string config_digest(const SpectrumConfig& cfg) {
  std::string canon = "v1|seed=" + std::to_string(cfg.seed) +
                      "|n=" + std::to_string(cfg.n_samples) + "|solo";
  char buf[160];
  for (const auto& [bin, p] : cfg.solo) {
    std::snprintf(buf, sizeof(buf), "|%d,%.17g,%.17g,%.17g,%.17g,%.17g", bin, p.a, p.b, p.c,
                  p.mean_x, p.mean_y);
    canon += buf;
  }
  canon += "|pairs";
  for (const auto& [bin, p] : cfg.pairs) {
    std::snprintf(buf, sizeof(buf), "|%d,%.17g,%.17g,%.17g", bin, p.a, p.b, p.c);
    canon += buf;
  }
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Per-bin (q, p) records of one simulated run plus the provenance metadata.
class FieldEnsemble {
 public:
  struct BinData {
    std::vector<double> q;
    std::vector<double> p;
  };

  FieldEnsemble(std::uint64_t seed, std::size_t n_samples, std::string digest)
      : seed_(seed), n_samples_(n_samples), digest_(std::move(digest)) {}

  std::uint64_t seed() const { return seed_; }
  std::size_t n_samples() const { return n_samples_; }
  const std::string& digest() const { return digest_; }

  bool has_bin(ModeIndex bin) const { return bins_.count(bin) != 0; }

  const BinData& bin(ModeIndex b) const {
    const auto it = bins_.find(b);
    if (it == bins_.end()) {
      throw BinAbsent("ensemble has no bin " + std::to_string(b));
    }
    return it->second;
  }

  std::vector<ModeIndex> bins() const {
    std::vector<ModeIndex> r;
    r.reserve(bins_.size());
    for (const auto& [b, _] : bins_) r.push_back(b);
    return r;
  }

  BinData& add_bin(ModeIndex b) {
    auto& d = bins_[b];
    d.q.resize(n_samples_);
    d.p.resize(n_samples_);
    return d;
  }

 private:
  std::uint64_t seed_;
  std::size_t n_samples_;
  std::string digest_;
  std::map<ModeIndex, BinData> bins_;
};

namespace detail {

inline constexpr std::size_t kSampleChunk = 1u << 16;

template <typename Fill>
void chunked_fill(std::size_t n, int threads, Fill&& fill) {
  const std::size_t n_chunks = (n + kSampleChunk - 1) / kSampleChunk;
  parallel_for(n_chunks, threads, [&](std::size_t chunk) {
    const std::size_t lo = chunk * kSampleChunk;
    const std::size_t hi = std::min(n, lo + kSampleChunk);
    for (std::size_t i = lo; i < hi; ++i) fill(i);
  });
}

}  // namespace detail

// Draw the configured run. Solo bin W: (q, p) ~ N(mean, M/2) with M the
// bin's quadrature CM. Pair W: (q_+, p_+, q_-, p_-) ~ N(0, M4/2) with M4 the
// expanded pair CM, stored under bins +W and -W.
inline FieldEnsemble sample_ensemble(const SpectrumConfig& cfg, int threads = 0) {
  validate(cfg);
  const int n_threads = resolve_thread_count(threads);
  FieldEnsemble ens(cfg.seed, cfg.n_samples, config_digest(cfg));

  for (const auto& [bin, params] : cfg.solo) {
    const QuadratureCM<double> cm = moments_from_params(params, QuadratureBasis::SpectralPQ);
    const Eigen::Matrix2d sigma = 0.5 * cm.matrix();
    const Eigen::Matrix2d l = Eigen::LLT<Eigen::Matrix2d>(sigma).matrixL();
    auto& data = ens.add_bin(bin);
    const rng::GaussianStream stream(cfg.seed, static_cast<std::uint32_t>(bin),
                                     rng::kDomainSoloBin);
    const double mq = params.mean_x;
    const double mp = params.mean_y;
    detail::chunked_fill(cfg.n_samples, n_threads, [&, mq, mp](std::size_t i) {
      const auto z = stream.normal_pair(i);
      data.q[i] = l(0, 0) * z[0] + mq;
      data.p[i] = l(1, 0) * z[0] + l(1, 1) * z[1] + mp;
    });
  }

  for (const auto& [bin, params] : cfg.pairs) {
    const TwoModeCM<double> full = expand_xy_to_full_pq_cm(
        xy_cm_from_two_mode_params(params, bin));
    const Eigen::Matrix4d sigma = 0.5 * full.matrix();
    const Eigen::Matrix4d l = Eigen::LLT<Eigen::Matrix4d>(sigma).matrixL();
    auto& plus = ens.add_bin(bin);
    auto& minus = ens.add_bin(-bin);
    const rng::GaussianStream stream(cfg.seed, static_cast<std::uint32_t>(bin),
                                     rng::kDomainPairBin);
    detail::chunked_fill(cfg.n_samples, n_threads, [&](std::size_t i) {
      const auto z01 = stream.normal_pair(2 * i);
      const auto z23 = stream.normal_pair(2 * i + 1);
      const Eigen::Vector4d z{z01[0], z01[1], z23[0], z23[1]};
      const Eigen::Vector4d v = l.template triangularView<Eigen::Lower>() * z;
      plus.q[i] = v[0];
      plus.p[i] = v[1];
      minus.q[i] = v[2];
      minus.p[i] = v[3];
    });
  }
  return ens;
}

// -- photocurrents --------------------------------------------------------------

// Balanced-homodyne photocurrent of one bin record: i = q_lo q + p_lo p.
inline double photocurrent_resonator(const SpectralQuadratures<double>& s,
                                     const LocalOscillator& lo) {
  return lo.q_lo * s.q + lo.p_lo * s.p;
}

// Broadband (pair) photocurrent component at +W: i = q_lo X + p_lo Y. The -W
// component is its complex conjugate for a real LO.
inline std::complex<double> photocurrent_broadband(const XYPairQuadratures<double>& pair,
                                                   const LocalOscillator& lo) {
  return lo.q_lo * pair.x + lo.p_lo * pair.y;
}

// -- moment collection and jackknife ---------------------------------------------

namespace detail {

template <int D>
struct BlockMoments {
  std::size_t count{0};
  Eigen::Matrix<double, D, 1> sum = Eigen::Matrix<double, D, 1>::Zero();
  Eigen::Matrix<double, D, D> sumsq = Eigen::Matrix<double, D, D>::Zero();

  BlockMoments& operator-=(const BlockMoments& o) {
    count -= o.count;
    sum -= o.sum;
    sumsq -= o.sumsq;
    return *this;
  }
};

// Doubled, mean-subtracted covariance (n-1 normalization): 2 cov(z).
template <int D>
Eigen::Matrix<double, D, D> doubled_covariance(const BlockMoments<D>& m) {
  const double n = static_cast<double>(m.count);
  const Eigen::Matrix<double, D, 1> mean = m.sum / n;
  return 2.0 * (m.sumsq - n * (mean * mean.transpose())) / (n - 1.0);
}

template <int D>
struct MomentSet {
  std::vector<BlockMoments<D>> blocks;
  BlockMoments<D> total;
};

// Gather per-block sufficient statistics of at(i) in [0, n). Fixed block
// boundaries make the jackknife reproducible.
template <int D, typename At>
MomentSet<D> collect_moments(std::size_t n, int threads, At&& at) {
  if (n < kNumBlocks) {
    throw InsufficientSamples("estimator needs at least " + std::to_string(kNumBlocks) +
                              " samples for " + std::to_string(kNumBlocks) +
                              " jackknife blocks (got " + std::to_string(n) + ")");
  }
  MomentSet<D> set;
  set.blocks.resize(kNumBlocks);
  parallel_for(kNumBlocks, resolve_thread_count(threads), [&](std::size_t b) {
    const std::size_t lo = b * n / kNumBlocks;
    const std::size_t hi = (b + 1) * n / kNumBlocks;
    auto& blk = set.blocks[b];
    blk.count = hi - lo;
    for (std::size_t i = lo; i < hi; ++i) {
      const Eigen::Matrix<double, D, 1> z = at(i);
      blk.sum += z;
      blk.sumsq += z * z.transpose();
    }
  });
  for (const auto& blk : set.blocks) {
    set.total.count += blk.count;
    set.total.sum += blk.sum;
    set.total.sumsq += blk.sumsq;
  }
  return set;
}

// Leave-one-block-out jackknife of stat(BlockMoments) -> VectorXd.
// Returns the full-sample estimate and per-component standard errors.
template <int D, typename Stat>
std::pair<Eigen::VectorXd, Eigen::VectorXd> jackknife(const MomentSet<D>& set, Stat&& stat) {
  const Eigen::VectorXd est = stat(set.total);
  const auto n_blocks = static_cast<double>(set.blocks.size());
  Eigen::MatrixXd reps(est.size(), set.blocks.size());
  for (std::size_t b = 0; b < set.blocks.size(); ++b) {
    BlockMoments<D> rest = set.total;
    rest -= set.blocks[b];
    reps.col(static_cast<Eigen::Index>(b)) = stat(rest);
  }
  const Eigen::VectorXd mean = reps.rowwise().mean();
  const Eigen::VectorXd var =
      (reps.colwise() - mean).array().square().rowwise().sum().matrix() *
      ((n_blocks - 1.0) / n_blocks);
  return {est, var.array().sqrt().matrix()};
}

}  // namespace detail

// -- estimators -------------------------------------------------------------------

struct EstimatedQuadratureCM {
  QuadratureCM<double> cm;
  double se_m_xx{0};
  double se_m_yy{0};
  double se_m_xy{0};
  std::size_t n{0};
};

struct EstimatedXYPairCM {
  XYPairCM<double> cm;
  double se_m_xx{0};
  double se_m_yy{0};
  double se_m_xy{0};
  std::size_t n{0};
};

struct EstimatedCrossBlock {
  Eigen::Matrix2d cross;
  Eigen::Matrix2d se;
  std::size_t n{0};
};

struct EstimatedGaussianParams {
  GaussianParams<double> params;
  double se_a{0};
  double se_b{0};
  double se_c{0};
  std::size_t n{0};
};

struct EstimatedTwoModeParams {
  TwoModeGaussianParams<double> params;
  double se_a{0};
  double se_b{0};
  double se_c{0};
  double purity{0};
  double se_purity{0};
  std::size_t n{0};
};

namespace detail {

inline MomentSet<2> pq_moments(const FieldEnsemble& ens, ModeIndex bin, int threads) {
  const auto& d = ens.bin(bin);
  return collect_moments<2>(ens.n_samples(), threads, [&](std::size_t i) {
    return Eigen::Vector2d{d.q[i], d.p[i]};
  });
}

inline MomentSet<4> xy_moments(const FieldEnsemble& ens, ModeIndex bin, int threads) {
  if (bin <= 0) {
    throw ModeMismatch("xy estimate: bin must be the positive pair member (got " +
                       std::to_string(bin) + ")");
  }
  const auto& plus = ens.bin(bin);
  const auto& minus = ens.bin(-bin);
  return collect_moments<4>(ens.n_samples(), threads, [&](std::size_t i) {
    const auto xy = xy_from_pq<double>({plus.q[i], plus.p[i], bin},
                                       {minus.q[i], minus.p[i], static_cast<ModeIndex>(-bin)});
    return Eigen::Vector4d{xy.x.real(), xy.x.imag(), xy.y.real(), xy.y.imag()};
  });
}

inline Eigen::Vector3d xy_entries(const BlockMoments<4>& m) {
  const Eigen::Matrix4d c = doubled_covariance(m);
  // m_xx = 2<|dX|^2> = 2(var re X + var im X); cross term keeps only the
  // stationary (real) part: 2 Re<dX conj dY> = 2(cov(reX,reY) + cov(imX,imY))
  return {c(0, 0) + c(1, 1), c(2, 2) + c(3, 3), c(0, 2) + c(1, 3)};
}

}  // namespace detail

// Doubled second moments of one bin with jackknife standard errors.
inline EstimatedQuadratureCM estimate_cm_pq(const FieldEnsemble& ens, ModeIndex bin,
                                            int threads = 0) {
  const auto set = detail::pq_moments(ens, bin, threads);
  const auto [est, se] = detail::jackknife<2>(set, [](const detail::BlockMoments<2>& m) {
    const Eigen::Matrix2d c = detail::doubled_covariance(m);
    return Eigen::Vector3d{c(0, 0), c(1, 1), c(0, 1)};
  });
  return {QuadratureCM<double>{est[0], est[1], est[2], QuadratureBasis::SpectralPQ},
          se[0], se[1], se[2], ens.n_samples()};
}

// Collective-pair moments of bins (+W, -W) with jackknife standard errors.
inline EstimatedXYPairCM estimate_cm_xy(const FieldEnsemble& ens, ModeIndex bin,
                                        int threads = 0) {
  const auto set = detail::xy_moments(ens, bin, threads);
  const auto [est, se] = detail::jackknife<4>(set, detail::xy_entries);
  return {XYPairCM<double>{est[0], est[1], est[2], bin}, se[0], se[1], se[2],
          ens.n_samples()};
}

// Doubled cross-covariance block between two bins (2<dr1 dr2^T>, r = (q, p)).
// For bin_1 == bin_2 this is just that bin's own CM.
inline EstimatedCrossBlock estimate_cross_block(const FieldEnsemble& ens, ModeIndex bin_1,
                                                ModeIndex bin_2, int threads = 0) {
  if (bin_1 == bin_2) {
    const auto set = detail::pq_moments(ens, bin_1, threads);
    const auto [est, se] = detail::jackknife<2>(set, [](const detail::BlockMoments<2>& m) {
      const Eigen::Matrix2d c = detail::doubled_covariance(m);
      return Eigen::Vector4d{c(0, 0), c(0, 1), c(1, 0), c(1, 1)};
    });
    EstimatedCrossBlock r;
    r.cross << est[0], est[1], est[2], est[3];
    r.se << se[0], se[1], se[2], se[3];
    r.n = ens.n_samples();
    return r;
  }
  const auto& d1 = ens.bin(bin_1);
  const auto& d2 = ens.bin(bin_2);
  const auto set = detail::collect_moments<4>(ens.n_samples(), threads, [&](std::size_t i) {
    return Eigen::Vector4d{d1.q[i], d1.p[i], d2.q[i], d2.p[i]};
  });
  const auto [est, se] = detail::jackknife<4>(set, [](const detail::BlockMoments<4>& m) {
    const Eigen::Matrix4d c = detail::doubled_covariance(m);
    return Eigen::Vector4d{c(0, 2), c(0, 3), c(1, 2), c(1, 3)};
  });
  EstimatedCrossBlock r;
  r.cross << est[0], est[1], est[2], est[3];
  r.se << se[0], se[1], se[2], se[3];
  r.n = ens.n_samples();
  return r;
}

// Exponent parameters of one bin, reconstructed from its estimated CM, with
// jackknife-propagated standard errors.
inline EstimatedGaussianParams estimate_single_mode_params(const FieldEnsemble& ens,
                                                           ModeIndex bin, int threads = 0) {
  const auto set = detail::pq_moments(ens, bin, threads);
  const auto [est, se] = detail::jackknife<2>(set, [](const detail::BlockMoments<2>& m) {
    const Eigen::Matrix2d c = detail::doubled_covariance(m);
    const auto p = params_from_quadrature_cm(
        QuadratureCM<double>{c(0, 0), c(1, 1), c(0, 1), QuadratureBasis::SpectralPQ});
    return Eigen::Vector3d{p.a, p.b, p.c};
  });
  return {GaussianParams<double>{est[0], est[1], est[2]}, se[0], se[1], se[2],
          ens.n_samples()};
}

// Pair exponent parameters and purity (1/det law) with propagated errors.
inline EstimatedTwoModeParams estimate_two_mode_params(const FieldEnsemble& ens, ModeIndex bin,
                                                       int threads = 0) {
  const auto set = detail::xy_moments(ens, bin, threads);
  const auto [est, se] = detail::jackknife<4>(set, [bin](const detail::BlockMoments<4>& m) {
    const Eigen::Vector3d e = detail::xy_entries(m);
    const XYPairCM<double> cm{e[0], e[1], e[2], bin};
    const auto p = two_mode_params_from_xy_cm(cm);
    return Eigen::Vector4d{p.a, p.b, p.c, purity_xy_pair(cm)};
  });
  return {TwoModeGaussianParams<double>{est[0], est[1], est[2]},
          se[0], se[1], se[2], est[3], se[3], ens.n_samples()};
}

}  // namespace covkit::homodyne
