#pragma once

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "csr/noise.hpp"
#include "csr/types.hpp"

namespace csr {

/// All CSR hyperparameters in one validated bundle.
struct CsrParams {
  int block_size = 8;   // B_r
  int window = 33;      // search window side, odd
  int step = 3;         // reference stride
  double tau_c = 6.0;   // distance threshold factor
  int mu_c = 25;        // maximum stacked cubes
  double alpha = 1e-6;  // prior regularizer

  void validate() const {
    if (block_size < 1) throw std::invalid_argument("CsrParams: block_size must be >= 1");
    if (window < block_size || window % 2 == 0) {
      throw std::invalid_argument("CsrParams: window must be odd and >= block_size");
    }
    if (step < 1) throw std::invalid_argument("CsrParams: step must be >= 1");
    if (!(tau_c > 0.0)) throw std::invalid_argument("CsrParams: tau_c must be positive");
    if (mu_c < 1) throw std::invalid_argument("CsrParams: mu_c must be >= 1");
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
      throw std::invalid_argument("CsrParams: alpha must be in (0, 1)");
    }
  }
};

struct PixelPos {
  int row = 0;
  int col = 0;

  friend bool operator==(const PixelPos& a, const PixelPos& b) {
    return a.row == b.row && a.col == b.col;
  }
};

struct Match {
  PixelPos pos;
  double distance = 0.0;
};

/// One reference block plus its matched block coordinates, sorted by ascending
/// distance with the reference itself (distance exactly 0) first.
struct MatchSet {
  PixelPos reference;
  std::vector<Match> matches;

  int size() const { return static_cast<int>(matches.size()); }
};

namespace detail {

inline void check_block_inside(const MultiCube& image, PixelPos p, int block, const char* what) {
  if (p.row < 0 || p.col < 0 || p.row + block > image.height() ||
      p.col + block > image.width()) {
    throw std::invalid_argument(std::string(what) + ": block outside image bounds");
  }
}

/// Sum of squared differences over a block pair, bailing out early once the
/// partial sum exceeds `bail` (pass +inf for an exact full distance).
inline double block_ssd(const MultiCube& image, PixelPos a, PixelPos b, int block, double bail) {
  double acc = 0.0;
  const int w = image.width();
  for (int c = 0; c < image.channels(); ++c) {
    const double* plane = image.channel_data(c);
    for (int by = 0; by < block; ++by) {
      const double* ra = plane + static_cast<size_t>(a.row + by) * w + a.col;
      const double* rb = plane + static_cast<size_t>(b.row + by) * w + b.col;
      for (int bx = 0; bx < block; ++bx) {
        const double d = ra[bx] - rb[bx];
        acc += d * d;
      }
    }
    if (acc > bail) return acc;
  }
  return acc;
}

}  // namespace detail

/// Squared L2 distance between two B x B x M blocks of the same image.
inline double cube_distance(const MultiCube& image, PixelPos a, PixelPos b, int block) {
  if (block < 1) throw std::invalid_argument("cube_distance: block must be >= 1");
  detail::check_block_inside(image, a, block, "cube_distance");
  detail::check_block_inside(image, b, block, "cube_distance");
  return detail::block_ssd(image, a, b, block, std::numeric_limits<double>::infinity());
}

/// Distance threshold tau = tau_c * mean noise variance.
inline double compute_tau(const NoiseCovariance& cov, const CsrParams& params) {
  return params.tau_c * mean_variance(cov);
}

namespace detail {

inline std::vector<int> reference_axis_positions(int dim, int block, int step) {
  std::vector<int> positions;
  const int last = dim - block;
  for (int p = 0; p <= last; p += step) positions.push_back(p);
  if (positions.empty() || positions.back() != last) positions.push_back(last);
  return positions;
}

}  // namespace detail

/// Reference top-left positions on a stride grid, clamped so the final row and
/// column of blocks always touch the image border (every pixel gets covered).
inline std::vector<PixelPos> reference_positions(int height, int width, const CsrParams& params) {
  params.validate();
  if (height < params.block_size || width < params.block_size) {
    throw std::invalid_argument("reference_positions: image smaller than one block");
  }
  const auto rows = detail::reference_axis_positions(height, params.block_size, params.step);
  const auto cols = detail::reference_axis_positions(width, params.block_size, params.step);
  std::vector<PixelPos> out;
  out.reserve(rows.size() * cols.size());
  for (int r : rows) {
    for (int c : cols) out.push_back({r, c});
  }
  return out;
}

/// Scans every candidate block whose top-left offset from the reference is at
/// most (window-1)/2 in each direction, keeps those with distance <= tau,
/// sorts ascending by (distance, row, col) and truncates to mu_c entries. The
/// reference itself is always first.
inline MatchSet match_cubes(const MultiCube& image, PixelPos reference, const CsrParams& params,
                            double tau) {
  params.validate();
  detail::check_block_inside(image, reference, params.block_size, "match_cubes");
  if (tau < 0.0) throw std::invalid_argument("match_cubes: tau must be >= 0");

  const int radius = (params.window - 1) / 2;
  const int y_lo = std::max(0, reference.row - radius);
  const int y_hi = std::min(image.height() - params.block_size, reference.row + radius);
  const int x_lo = std::max(0, reference.col - radius);
  const int x_hi = std::min(image.width() - params.block_size, reference.col + radius);

  std::vector<Match> candidates;
  for (int y = y_lo; y <= y_hi; ++y) {
    for (int x = x_lo; x <= x_hi; ++x) {
      if (y == reference.row && x == reference.col) continue;
      const double d = detail::block_ssd(image, reference, {y, x}, params.block_size, tau);
      if (d <= tau) candidates.push_back({{y, x}, d});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Match& a, const Match& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.pos.row != b.pos.row) return a.pos.row < b.pos.row;
    return a.pos.col < b.pos.col;
  });
  if (static_cast<int>(candidates.size()) > params.mu_c - 1) {
    candidates.resize(params.mu_c - 1);
  }

  MatchSet ms;
  ms.reference = reference;
  ms.matches.reserve(candidates.size() + 1);
  ms.matches.push_back({reference, 0.0});
  ms.matches.insert(ms.matches.end(), candidates.begin(), candidates.end());
  return ms;
}

}  // namespace csr
