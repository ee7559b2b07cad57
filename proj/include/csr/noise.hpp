#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "csr/types.hpp"

namespace csr {

/// Diagonal noise covariance: one variance per multispectral channel.
struct NoiseCovariance {
  Eigen::VectorXd variances;

  NoiseCovariance() = default;
  explicit NoiseCovariance(Eigen::VectorXd v) : variances(std::move(v)) {
    if (!variances.allFinite() || (variances.array() < 0.0).any()) {
      throw std::invalid_argument("NoiseCovariance: variances must be finite and nonnegative");
    }
  }

  int size() const { return static_cast<int>(variances.size()); }

  Eigen::MatrixXd as_matrix() const {
    return Eigen::MatrixXd(variances.asDiagonal());
  }
};

/// Photon-scale factor of the Poisson model; lower means stronger noise.
struct IntensityLevel {
  double l = 1.0;

  IntensityLevel() = default;
  explicit IntensityLevel(double level) : l(level) {
    if (!(level > 0.0) || !std::isfinite(level)) {
      throw std::invalid_argument("IntensityLevel: level must be positive and finite");
    }
  }
};

inline double mean_variance(const NoiseCovariance& cov) {
  if (cov.variances.size() == 0) return 0.0;
  return cov.variances.mean();
}

namespace rng {

// murmur3 finalizer; full 64-bit avalanche.
inline uint64_t mix64(uint64_t z) {
  z ^= z >> 33;
  z *= 0xff51afd7ed558ccdULL;
  z ^= z >> 33;
  z *= 0xc4ceb9fe1a85ec53ULL;
  z ^= z >> 33;
  return z;
}

/// Key derivation for the per-sample streams. Each (seed, channel, y, x)
/// owns an independent stream, so corruption results do not depend on pixel
/// iteration order or thread count.
inline uint64_t sample_key(uint64_t seed, uint64_t channel, uint64_t y, uint64_t x) {
  uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ULL);
  h = mix64(h ^ (channel + 0x9e3779b97f4a7c15ULL));
  h = mix64(h ^ (y + 0x9e3779b97f4a7c15ULL));
  h = mix64(h ^ (x + 0x9e3779b97f4a7c15ULL));
  return h;
}

/// Splitmix-style counter generator seeded from a sample key.
class Stream {
 public:
  explicit Stream(uint64_t key) : state_(key) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1].
  double next_unit_pos() { return 1.0 - next_unit(); }

 private:
  uint64_t state_;
};

inline constexpr double kPoissonInversionCutoff = 30.0;

/// Poisson draw: sequential-search inversion below the cutoff, Hormann's PTRS
/// transformed rejection above it.
inline int64_t sample_poisson(Stream& stream, double mean) {
  if (mean <= 0.0) return 0;
  if (mean < kPoissonInversionCutoff) {
    const double u = stream.next_unit();
    double p = std::exp(-mean);
    double cumulative = p;
    int64_t k = 0;
    while (u > cumulative && k < 2000) {
      ++k;
      p *= mean / static_cast<double>(k);
      cumulative += p;
    }
    return k;
  }
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = stream.next_unit() - 0.5;
    const double v = stream.next_unit();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<int64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        k * loglam - mean - std::lgamma(k + 1.0)) {
      return static_cast<int64_t>(k);
    }
  }
}

/// Standard normal draw via Box-Muller.
inline double sample_gaussian(Stream& stream) {
  const double u1 = stream.next_unit_pos();
  const double u2 = stream.next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace rng

/// Shot-noise simulation: each sample becomes Poisson(l * value) / l.
/// Input must be normalized to [0, 1]. Deterministic given the seed.
inline MultiCube poisson_corrupt(const MultiCube& clean, const IntensityLevel& level,
                                 uint64_t seed) {
  MultiCube out(clean.height(), clean.width(), clean.channels());
  for (int c = 0; c < clean.channels(); ++c) {
    const double* src = clean.channel_data(c);
    double* dst = out.channel_data(c);
    for (int y = 0; y < clean.height(); ++y) {
      for (int x = 0; x < clean.width(); ++x) {
        const size_t i = static_cast<size_t>(y) * clean.width() + x;
        const double v = src[i];
        if (v < 0.0) {
          throw std::invalid_argument("poisson_corrupt: negative input value");
        }
        if (v > 1.0) {
          throw std::invalid_argument("poisson_corrupt: input must be normalized to [0, 1]");
        }
        rng::Stream stream(rng::sample_key(seed, c, y, x));
        dst[i] = static_cast<double>(rng::sample_poisson(stream, level.l * v)) / level.l;
      }
    }
  }
  return out;
}

/// AWGN simulation: independent zero-mean Gaussian per sample with the
/// channel's variance. Deterministic given the seed; zero-variance channels
/// are copied bit-exactly.
inline MultiCube awgn_corrupt(const MultiCube& clean, const NoiseCovariance& cov,
                              uint64_t seed) {
  if (cov.size() != clean.channels()) {
    throw std::invalid_argument("awgn_corrupt: variance count does not match channel count");
  }
  MultiCube out = clean;
  for (int c = 0; c < clean.channels(); ++c) {
    const double sigma = std::sqrt(cov.variances[c]);
    if (sigma == 0.0) continue;
    double* dst = out.channel_data(c);
    for (int y = 0; y < clean.height(); ++y) {
      for (int x = 0; x < clean.width(); ++x) {
        const size_t i = static_cast<size_t>(y) * clean.width() + x;
        rng::Stream stream(rng::sample_key(seed, c, y, x));
        dst[i] += sigma * rng::sample_gaussian(stream);
      }
    }
  }
  return out;
}

/// Per-channel noise-variance estimate from a single image: absolute response
/// to the 3x3 Laplacian-difference kernel [[1,-2,1],[-2,4,-2],[1,-2,1]],
/// normalized by sqrt(pi/2)/6 per interior pixel. The kernel annihilates
/// anything affine in the pixel coordinates, so scene gradients do not bias
/// the estimate.
inline NoiseCovariance estimate_noise_variances(const MultiCube& noisy) {
  const int h = noisy.height();
  const int w = noisy.width();
  if (h < 3 || w < 3) {
    throw std::invalid_argument("estimate_noise_variances: image must be at least 3x3");
  }
  Eigen::VectorXd variances(noisy.channels());
  const double scale = std::sqrt(M_PI / 2.0) / (6.0 * (w - 2) * (h - 2));
  for (int c = 0; c < noisy.channels(); ++c) {
    const double* p = noisy.channel_data(c);
    auto v = [&](int y, int x) { return p[static_cast<size_t>(y) * w + x]; };
    double acc = 0.0;
    for (int y = 1; y < h - 1; ++y) {
      for (int x = 1; x < w - 1; ++x) {
        const double r = v(y - 1, x - 1) - 2.0 * v(y - 1, x) + v(y - 1, x + 1) -
                         2.0 * v(y, x - 1) + 4.0 * v(y, x) - 2.0 * v(y, x + 1) +
                         v(y + 1, x - 1) - 2.0 * v(y + 1, x) + v(y + 1, x + 1);
        acc += std::abs(r);
      }
    }
    const double sigma = acc * scale;
    variances[c] = sigma * sigma;
  }
  return NoiseCovariance(std::move(variances));
}

}  // namespace csr
