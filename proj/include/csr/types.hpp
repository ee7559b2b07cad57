#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace csr {

/// Structured failure while reading or writing one of the on-disk formats.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure inside a solver (non-positive pivot, singular system).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Uniformly sampled wavelength axis shared by spectra, filter banks and cubes.
struct SpectralGrid {
  double lambda_min_nm = 0.0;
  double lambda_max_nm = 0.0;
  int n_bands = 0;

  SpectralGrid() = default;
  SpectralGrid(double lambda_min, double lambda_max, int bands)
      : lambda_min_nm(lambda_min), lambda_max_nm(lambda_max), n_bands(bands) {
    if (!(lambda_min < lambda_max)) {
      throw std::invalid_argument("SpectralGrid: lambda_min must be < lambda_max");
    }
    if (bands < 3) {
      throw std::invalid_argument("SpectralGrid: need at least 3 bands");
    }
    if (!std::isfinite(lambda_min) || !std::isfinite(lambda_max)) {
      throw std::invalid_argument("SpectralGrid: wavelengths must be finite");
    }
  }

  double spacing_nm() const {
    return (lambda_max_nm - lambda_min_nm) / static_cast<double>(n_bands - 1);
  }

  double wavelength_nm(int band) const {
    return lambda_min_nm + static_cast<double>(band) * spacing_nm();
  }

  friend bool operator==(const SpectralGrid& a, const SpectralGrid& b) {
    return a.lambda_min_nm == b.lambda_min_nm && a.lambda_max_nm == b.lambda_max_nm &&
           a.n_bands == b.n_bands;
  }
  friend bool operator!=(const SpectralGrid& a, const SpectralGrid& b) { return !(a == b); }
};

/// A single sampled spectrum on a grid.
struct Spectrum {
  SpectralGrid grid;
  Eigen::VectorXd values;
};

namespace detail {

inline void check_cube_dims(int height, int width, int planes, const char* what) {
  if (height < 1 || width < 1 || planes < 1) {
    throw std::invalid_argument(std::string(what) + ": dimensions must be positive");
  }
}

}  // namespace detail

/// H x W x N hyperspectral image. Band-sequential storage: all of band 0
/// (row-major), then band 1, and so on — matching the on-disk layout.
class HyperCube {
 public:
  HyperCube() = default;
  HyperCube(int height, int width, SpectralGrid grid)
      : height_(height), width_(width), grid_(grid) {
    detail::check_cube_dims(height, width, grid.n_bands, "HyperCube");
    data_.assign(static_cast<size_t>(height) * width * grid.n_bands, 0.0);
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int bands() const { return grid_.n_bands; }
  const SpectralGrid& grid() const { return grid_; }

  double at(int y, int x, int band) const { return data_[index(y, x, band)]; }
  double& at(int y, int x, int band) { return data_[index(y, x, band)]; }

  const double* band_data(int band) const {
    return data_.data() + static_cast<size_t>(band) * height_ * width_;
  }
  double* band_data(int band) {
    return data_.data() + static_cast<size_t>(band) * height_ * width_;
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  double max_value() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, v);
    return m;
  }

 private:
  size_t index(int y, int x, int band) const {
    return (static_cast<size_t>(band) * height_ + y) * width_ + x;
  }

  int height_ = 0;
  int width_ = 0;
  SpectralGrid grid_;
  std::vector<double> data_;
};

/// H x W x M multispectral image, band-sequential like HyperCube. Values may
/// be negative only after AWGN injection; Poisson output is nonnegative.
class MultiCube {
 public:
  MultiCube() = default;
  MultiCube(int height, int width, int channels)
      : height_(height), width_(width), channels_(channels) {
    detail::check_cube_dims(height, width, channels, "MultiCube");
    data_.assign(static_cast<size_t>(height) * width * channels, 0.0);
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }

  double at(int y, int x, int channel) const { return data_[index(y, x, channel)]; }
  double& at(int y, int x, int channel) { return data_[index(y, x, channel)]; }

  const double* channel_data(int channel) const {
    return data_.data() + static_cast<size_t>(channel) * height_ * width_;
  }
  double* channel_data(int channel) {
    return data_.data() + static_cast<size_t>(channel) * height_ * width_;
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  double max_value() const {
    double m = data_.empty() ? 0.0 : data_.front();
    for (double v : data_) m = std::max(m, v);
    return m;
  }

 private:
  size_t index(int y, int x, int channel) const {
    return (static_cast<size_t>(channel) * height_ + y) * width_ + x;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

}  // namespace csr
