#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>

#include "csr/types.hpp"

namespace csr {

namespace detail {

/// Locates the first non-positive Cholesky pivot of a symmetric matrix, or -1
/// if the plain lower factorization goes through.
inline int first_nonpositive_pivot(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0)) return static_cast<int>(j);
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
  }
  return -1;
}

/// Cholesky factorization that raises NumericalError naming the offending
/// pivot instead of silently returning garbage.
inline Eigen::LLT<Eigen::MatrixXd> spd_factorize(const Eigen::MatrixXd& a, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    int pivot = first_nonpositive_pivot(a);
    throw NumericalError(std::string(what) + ": matrix is not positive definite (pivot " +
                         std::to_string(pivot) + " non-positive)");
  }
  return llt;
}

inline Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& a, const char* what) {
  auto llt = spd_factorize(a, what);
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
  // Keep the result exactly symmetric for downstream factorizations.
  inv = ((inv + inv.transpose()) * 0.5).eval();
  return inv;
}

}  // namespace detail

/// M x N sampled filter transmittances: the camera forward model. Row i is
/// the i-th channel's response at the grid's band centers.
struct FilterBank {
  SpectralGrid grid;
  Eigen::MatrixXd responses;

  FilterBank() = default;
  FilterBank(SpectralGrid g, Eigen::MatrixXd r) : grid(g), responses(std::move(r)) {
    if (responses.rows() < 1) {
      throw std::invalid_argument("FilterBank: need at least one channel");
    }
    if (responses.cols() != grid.n_bands) {
      throw std::invalid_argument("FilterBank: response columns must match grid bands");
    }
    if (responses.rows() >= grid.n_bands) {
      throw std::invalid_argument("FilterBank: channels must be fewer than bands (underdetermined system)");
    }
    if (!responses.allFinite() || (responses.array() < 0.0).any()) {
      throw std::invalid_argument("FilterBank: responses must be finite and nonnegative");
    }
    for (Eigen::Index i = 0; i < responses.rows(); ++i) {
      if (responses.row(i).maxCoeff() <= 0.0) {
        throw std::invalid_argument("FilterBank: channel " + std::to_string(i) + " is all-zero");
      }
    }
  }

  int n_channels() const { return static_cast<int>(responses.rows()); }
  int n_bands() const { return grid.n_bands; }
};

/// Spectral covariance prior derived from small second-order differences:
/// k_s = (D2' D2 + alpha I)^-1. `smoothing_matrix` keeps the un-inverted form
/// (the channel count M is unrelated despite the shared letter in the texts).
struct SmoothnessPrior {
  int n_bands = 0;
  double alpha = 0.0;
  Eigen::MatrixXd k_s;
  Eigen::MatrixXd smoothing_matrix;
};

/// Banded forward-difference matrix: 1 on the diagonal, -1 on the first
/// superdiagonal. cols must equal rows + 1.
inline Eigen::MatrixXd build_first_difference(int rows, int cols) {
  if (rows < 1 || cols != rows + 1) {
    throw std::invalid_argument("build_first_difference: need cols == rows + 1, rows >= 1");
  }
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows, cols);
  for (int i = 0; i < rows; ++i) {
    d(i, i) = 1.0;
    d(i, i + 1) = -1.0;
  }
  return d;
}

/// (N-2) x N second-difference matrix, the product of the two first-difference
/// matrices; each row carries the (1, -2, 1) stencil.
inline Eigen::MatrixXd build_second_difference(int n_bands) {
  if (n_bands < 3) {
    throw std::invalid_argument("build_second_difference: need at least 3 bands");
  }
  return build_first_difference(n_bands - 2, n_bands - 1) *
         build_first_difference(n_bands - 1, n_bands);
}

inline SmoothnessPrior build_smoothness_prior(int n_bands, double alpha) {
  if (n_bands < 3) {
    throw std::invalid_argument("build_smoothness_prior: need at least 3 bands");
  }
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw std::invalid_argument(
        "build_smoothness_prior: alpha must be in (0, 1); D2'D2 alone is singular");
  }
  Eigen::MatrixXd d2 = build_second_difference(n_bands);
  SmoothnessPrior prior;
  prior.n_bands = n_bands;
  prior.alpha = alpha;
  prior.smoothing_matrix =
      d2.transpose() * d2 + alpha * Eigen::MatrixXd::Identity(n_bands, n_bands);
  prior.k_s = detail::spd_inverse(prior.smoothing_matrix, "build_smoothness_prior");
  return prior;
}

/// Block-diagonal extension I_t (x) base.
inline Eigen::MatrixXd kron_identity_extend(const Eigen::MatrixXd& base, int t) {
  if (t < 1) {
    throw std::invalid_argument("kron_identity_extend: t must be >= 1");
  }
  const Eigen::Index r = base.rows();
  const Eigen::Index c = base.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(t * r, t * c);
  for (int k = 0; k < t; ++k) {
    out.block(k * r, k * c, r, c) = base;
  }
  return out;
}

/// t x t tiling 1 (x) base; base must be square.
inline Eigen::MatrixXd kron_ones_extend(const Eigen::MatrixXd& base, int t) {
  if (t < 1) {
    throw std::invalid_argument("kron_ones_extend: t must be >= 1");
  }
  if (base.rows() != base.cols()) {
    throw std::invalid_argument("kron_ones_extend: base must be square");
  }
  const Eigen::Index n = base.rows();
  Eigen::MatrixXd out(t * n, t * n);
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < t; ++j) {
      out.block(i * n, j * n, n, n) = base;
    }
  }
  return out;
}

// Adjacent flat-top filters cross at this fraction of peak, at the midpoint
// between their centers.
inline constexpr double kFlatTopCrossover = 0.4;

/// Bank of overlapping super-Gaussian flat-top filters exp(-((l-mu)/w)^(2p)),
/// centers uniformly spaced over the grid, peak transmittance 1.
inline FilterBank generate_flat_top_bank(const SpectralGrid& grid, int n_channels,
                                         double sharpness) {
  if (n_channels < 2) {
    throw std::invalid_argument("generate_flat_top_bank: need at least 2 channels");
  }
  if (n_channels >= grid.n_bands) {
    throw std::invalid_argument(
        "generate_flat_top_bank: channels must be fewer than bands (underdetermined system)");
  }
  if (!(sharpness > 0.0)) {
    throw std::invalid_argument("generate_flat_top_bank: sharpness must be positive");
  }
  const double span = grid.lambda_max_nm - grid.lambda_min_nm;
  const double center_step = span / static_cast<double>(n_channels - 1);
  // Width such that the response at half the center spacing equals the
  // crossover fraction: ((step/2)/w)^(2p) = -ln(crossover).
  const double width =
      (center_step / 2.0) / std::pow(-std::log(kFlatTopCrossover), 1.0 / (2.0 * sharpness));
  Eigen::MatrixXd responses(n_channels, grid.n_bands);
  for (int i = 0; i < n_channels; ++i) {
    const double center = grid.lambda_min_nm + i * center_step;
    for (int k = 0; k < grid.n_bands; ++k) {
      const double u = (grid.wavelength_nm(k) - center) / width;
      responses(i, k) = std::exp(-std::pow(u * u, sharpness));
    }
  }
  return FilterBank(grid, std::move(responses));
}

/// Noiseless capture c = F s applied per pixel; output is H x W x M.
inline MultiCube forward_capture(const HyperCube& scene, const FilterBank& bank) {
  if (scene.grid() != bank.grid) {
    throw std::invalid_argument("forward_capture: scene and filter bank grids differ");
  }
  const int n = scene.bands();
  const int m = bank.n_channels();
  const Eigen::Index pixels = static_cast<Eigen::Index>(scene.height()) * scene.width();
  MultiCube out(scene.height(), scene.width(), m);
  // Band-sequential storage makes each band one contiguous row of an
  // N x (H*W) matrix view, so the capture is a single product.
  using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                     Eigen::RowMajor>>;
  using RowMajorOut =
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  RowMajorMap s(scene.data().data(), n, pixels);
  RowMajorOut c(out.data().data(), m, pixels);
  c.noalias() = bank.responses * s;
  return out;
}

}  // namespace csr
