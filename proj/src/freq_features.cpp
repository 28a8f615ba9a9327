#include "splicedet/freq_features.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace splicedet {

const std::array<int, 64>& zigzag_index_table() {
  static const std::array<int, 64> table = [] {
    std::array<int, 64> t{};
    int idx = 0;
    for (int s = 0; s <= 14; ++s) {
      if (s % 2 == 0) {
        for (int y = std::min(s, 7); y >= std::max(0, s - 7); --y)
          t[std::size_t(y) * 8 + (s - y)] = idx++;
      } else {
        for (int y = std::max(0, s - 7); y <= std::min(s, 7); ++y)
          t[std::size_t(y) * 8 + (s - y)] = idx++;
      }
    }
    return t;
  }();
  return table;
}

Vector dct_statistics(const BlockDct& coeffs) {
  if (coeffs.blocks.empty()) throw ArgumentError("dct_statistics: no blocks");
  const auto& zig = zigzag_index_table();

  double band_energy[4] = {0, 0, 0, 0};  // dc, low, mid, high
  double ac_sum = 0, ac_count = 0;
  for (const auto& b : coeffs.blocks) {
    for (int u = 0; u < 8; ++u) {
      for (int v = 0; v < 8; ++v) {
        const double c = b(u, v);
        const int z = zig[std::size_t(u) * 8 + v];
        int band = z == 0 ? 0 : (z <= 9 ? 1 : (z <= 35 ? 2 : 3));
        band_energy[band] += c * c;
        if (z != 0) {
          ac_sum += c;
          ac_count += 1;
        }
      }
    }
  }
  const double total = band_energy[0] + band_energy[1] + band_energy[2] + band_energy[3];

  Vector out = Vector::Zero(6);
  if (total <= 0) {
    out[0] = 1.0;
    return out;
  }
  for (int i = 0; i < 4; ++i) out[i] = band_energy[i] / total;

  const double ac_mean = ac_sum / ac_count;
  double m2 = 0, m4 = 0;
  for (const auto& b : coeffs.blocks) {
    for (int u = 0; u < 8; ++u) {
      for (int v = 0; v < 8; ++v) {
        if (zig[std::size_t(u) * 8 + v] == 0) continue;
        double d = b(u, v) - ac_mean;
        m2 += d * d;
        m4 += d * d * d * d;
      }
    }
  }
  m2 /= ac_count;
  m4 /= ac_count;
  // Below 1e-24 the AC content is transform round-off, not signal.
  out[4] = m2 > 1e-24 ? std::sqrt(m2) : 0.0;
  out[5] = m2 > 1e-24 ? m4 / (m2 * m2) - 3.0 : 0.0;
  return out;
}

double blockiness(const Array2D& gray) {
  const int h = int(gray.rows()), w = int(gray.cols());
  if (h < 17 || w < 17) throw ArgumentError("blockiness: input must be at least 17x17");

  double bsum = 0, bcount = 0, osum = 0, ocount = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x + 1 < w; ++x) {
      double d = std::abs(gray(y, x) - gray(y, x + 1));
      if (x % 8 == 7) {
        bsum += d;
        bcount += 1;
      } else {
        osum += d;
        ocount += 1;
      }
    }
  }
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y + 1 < h; ++y) {
      double d = std::abs(gray(y, x) - gray(y + 1, x));
      if (y % 8 == 7) {
        bsum += d;
        bcount += 1;
      } else {
        osum += d;
        ocount += 1;
      }
    }
  }
  const double denom = ocount > 0 ? osum / ocount : 0.0;
  if (denom <= 0) return 1.0;
  return (bsum / bcount) / denom;
}

namespace {

/// Periodic Hann window; its DFT occupies only bins {0, 1, N-1}, so a
/// windowed constant leaves every bin of radius >= 2 exactly zero.
Vector hann_periodic(int n) {
  Vector w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n);
  return w;
}

Eigen::MatrixXcd fft2(const Array2D& x) {
  const int h = int(x.rows()), w = int(x.cols());
  Eigen::MatrixXcd spec(h, w);
  Eigen::FFT<double> fft;
  Eigen::VectorXcd in(w), out(w);
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx < w; ++xx) in[xx] = std::complex<double>(x(y, xx), 0.0);
    fft.fwd(out, in);
    spec.row(y) = out.transpose();
  }
  Eigen::VectorXcd cin(h), cout(h);
  for (int xx = 0; xx < w; ++xx) {
    cin = spec.col(xx);
    fft.fwd(cout, cin);
    spec.col(xx) = cout;
  }
  return spec;
}

Array2D apply_hann(const Array2D& x) {
  Vector wy = hann_periodic(int(x.rows()));
  Vector wx = hann_periodic(int(x.cols()));
  Array2D out = x;
  for (Eigen::Index y = 0; y < x.rows(); ++y)
    for (Eigen::Index xx = 0; xx < x.cols(); ++xx) out(y, xx) *= wy[y] * wx[xx];
  return out;
}

/// Signed frequency radius of bin (u,v) with wraparound.
double bin_radius(int u, int v, int h, int w) {
  double fu = u <= h / 2 ? u : u - h;
  double fv = v <= w / 2 ? v : v - w;
  return std::sqrt(fu * fu + fv * fv);
}

}  // namespace

Eigen::Vector2d fft_periodicity(const Array2D& gray) {
  const int h = int(gray.rows()), w = int(gray.cols());
  if (h < 16 || w < 16)
    throw ArgumentError("fft_periodicity: input must be at least 16x16");

  Eigen::MatrixXcd spec = fft2(apply_hann(gray));
  std::vector<double> mags;
  mags.reserve(std::size_t(h) * w);
  double peak = 0, peak_radius = 2.0;
  for (int u = 0; u < h; ++u) {
    for (int v = 0; v < w; ++v) {
      double r = bin_radius(u, v, h, w);
      if (r < 2.0) continue;
      double m = std::abs(spec(u, v));
      mags.push_back(m);
      if (m > peak) {
        peak = m;
        peak_radius = r;
      }
    }
  }
  const double norm = std::min(h, w);
  if (mags.empty() || peak <= 1e-12)
    return {1.0, 2.0 / norm};  // spectrally empty beyond the window lobe

  std::nth_element(mags.begin(), mags.begin() + mags.size() / 2, mags.end());
  double median = mags[mags.size() / 2];
  double ratio = peak / std::max(median, peak * 1e-6);
  return {ratio, peak_radius / norm};
}

namespace {

struct HaarBands {
  Array2D ll, lh, hl, hh;
};

/// One separable orthonormal Haar level; input dims must be even.
HaarBands haar_level(const Array2D& x) {
  const int h = int(x.rows()), w = int(x.cols());
  const double s = 1.0 / std::sqrt(2.0);
  Array2D lo_x(h, w / 2), hi_x(h, w / 2);
  for (int y = 0; y < h; ++y) {
    for (int x2 = 0; x2 < w / 2; ++x2) {
      double a = x(y, 2 * x2), b = x(y, 2 * x2 + 1);
      lo_x(y, x2) = s * (a + b);
      hi_x(y, x2) = s * (a - b);
    }
  }
  HaarBands bands;
  bands.ll.resize(h / 2, w / 2);
  bands.lh.resize(h / 2, w / 2);
  bands.hl.resize(h / 2, w / 2);
  bands.hh.resize(h / 2, w / 2);
  for (int y2 = 0; y2 < h / 2; ++y2) {
    for (int x2 = 0; x2 < w / 2; ++x2) {
      double la = lo_x(2 * y2, x2), lb = lo_x(2 * y2 + 1, x2);
      double ha = hi_x(2 * y2, x2), hb = hi_x(2 * y2 + 1, x2);
      bands.ll(y2, x2) = s * (la + lb);
      bands.hl(y2, x2) = s * (la - lb);  // high-pass along y
      bands.lh(y2, x2) = s * (ha + hb);  // high-pass along x
      bands.hh(y2, x2) = s * (ha - hb);
    }
  }
  return bands;
}

void band_stats(const Array2D& band, double* mean_abs, double* sd) {
  const double n = double(band.size());
  *mean_abs = band.abs().sum() / n;
  double mean = band.sum() / n;
  *sd = std::sqrt((band - mean).square().sum() / n);
}

}  // namespace

Vector wavelet_features(const Array2D& gray, int levels) {
  if (levels < 1) throw ArgumentError("wavelet_features: levels must be >= 1");
  const int min_dim = 1 << levels;
  if (gray.rows() < min_dim || gray.cols() < min_dim)
    throw ArgumentError("wavelet_features: input too small for level count");

  Vector out = Vector::Zero(Eigen::Index(6) * levels);
  Array2D current = gray;
  for (int level = 0; level < levels; ++level) {
    int h = int(current.rows()) / 2 * 2, w = int(current.cols()) / 2 * 2;
    HaarBands bands = haar_level(current.topLeftCorner(h, w));
    const Array2D* detail[3] = {&bands.lh, &bands.hl, &bands.hh};
    for (int b = 0; b < 3; ++b) {
      double mean_abs, sd;
      band_stats(*detail[b], &mean_abs, &sd);
      out[6 * level + 2 * b] = mean_abs;
      out[6 * level + 2 * b + 1] = sd;
    }
    current = bands.ll;
  }
  return out;
}

Vector psd_features(const Array2D& gray) {
  const int h = int(gray.rows()), w = int(gray.cols());
  if (h < 16 || w < 16) throw ArgumentError("psd_features: input must be at least 16x16");

  Eigen::MatrixXcd spec = fft2(apply_hann(gray));
  const int rmax = std::min(h, w) / 2;
  std::vector<double> sum(std::size_t(rmax), 0.0);
  std::vector<double> count(std::size_t(rmax), 0.0);
  for (int u = 0; u < h; ++u) {
    for (int v = 0; v < w; ++v) {
      double r = bin_radius(u, v, h, w);
      int ri = int(std::lround(r));
      if (ri < 1 || ri >= rmax) continue;
      sum[std::size_t(ri)] += std::norm(spec(u, v)) / (double(h) * w);
      count[std::size_t(ri)] += 1.0;
    }
  }

  // Least-squares slope of log(mean PSD) vs log(r) over r in [2, rmax).
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (int r = 2; r < rmax; ++r) {
    if (count[std::size_t(r)] <= 0) continue;
    double p = sum[std::size_t(r)] / count[std::size_t(r)];
    if (p <= 0) continue;
    double lx = std::log(double(r)), ly = std::log(p);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    n += 1;
  }
  double slope = 0;
  double det = n * sxx - sx * sx;
  if (n >= 2 && std::abs(det) > 1e-24) slope = (n * sxy - sx * sy) / det;

  double b1 = rmax / 3.0, b2 = 2.0 * rmax / 3.0;
  double bands[3] = {0, 0, 0};
  for (int r = 1; r < rmax; ++r) {
    double e = sum[std::size_t(r)];
    if (r < b1)
      bands[0] += e;
    else if (r < b2)
      bands[1] += e;
    else
      bands[2] += e;
  }
  double total = bands[0] + bands[1] + bands[2];
  Vector out = Vector::Zero(4);
  out[0] = slope;
  if (total > 0)
    for (int i = 0; i < 3; ++i) out[1 + i] = bands[i] / total;
  return out;
}

Vector frequency_features(const Array2D& gray) {
  Vector out(kFrequencyDim);
  out.segment(0, 6) = dct_statistics(block_dct(gray));
  out[6] = blockiness(gray);
  out.segment(7, 2) = fft_periodicity(gray);
  out.segment(9, 12) = wavelet_features(gray, 2);
  out.segment(21, 4) = psd_features(gray);
  return out;
}

}  // namespace splicedet
