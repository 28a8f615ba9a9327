// Independent reference implementations used only by tests. Everything here
// is deliberately written as plain loops, separate from the library code
// paths it checks.
#pragma once

#include "splicedet/types.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracles {

using splicedet::Array2D;
using splicedet::Matrix;
using splicedet::Matrix8;
using splicedet::Vector;

// Brute-force 2D cross-correlation with reflect-101 padding.
inline Array2D correlate_3x3_reflect(const Array2D& x, const Eigen::Matrix3d& k) {
  const int h = int(x.rows()), w = int(x.cols());
  auto ref = [](int i, int n) {
    while (i < 0 || i >= n) {
      if (i < 0) i = -i;
      if (i >= n) i = 2 * n - 2 - i;
    }
    return i;
  };
  Array2D out(h, w);
  for (int y = 0; y < h; ++y)
    for (int c = 0; c < w; ++c) {
      double acc = 0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          acc += k(i, j) * x(ref(y + i - 1, h), ref(c + j - 1, w));
      out(y, c) = acc;
    }
  return out;
}

// O(n^4) orthonormal DCT-II by direct summation.
inline Matrix8 dct2_direct(const Matrix8& block) {
  Matrix8 out;
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) {
      double su = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      double sv = v == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      double acc = 0;
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
          acc += block(y, x) * std::cos(M_PI * (2 * y + 1) * u / 16.0) *
                 std::cos(M_PI * (2 * x + 1) * v / 16.0);
      out(u, v) = su * sv * acc;
    }
  }
  return out;
}

// O(n^4) inverse of the orthonormal DCT-II by direct summation.
inline Matrix8 idct2_direct(const Matrix8& coeffs) {
  Matrix8 out;
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      double acc = 0;
      for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v) {
          double su = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
          double sv = v == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
          acc += su * sv * coeffs(u, v) * std::cos(M_PI * (2 * y + 1) * u / 16.0) *
                 std::cos(M_PI * (2 * x + 1) * v / 16.0);
        }
      out(y, x) = acc;
    }
  }
  return out;
}

// Quantize-dequantize one coefficient block against a table.
inline Matrix8 quantize_block(const Matrix8& coeffs, const Matrix8& q) {
  Matrix8 out;
  for (int u = 0; u < 8; ++u)
    for (int v = 0; v < 8; ++v) out(u, v) = std::round(coeffs(u, v) / q(u, v)) * q(u, v);
  return out;
}

struct Moments {
  double mean_abs, sd, skew, kurt;
};

// Two-pass population moments.
inline Moments moments(const std::vector<double>& v) {
  const double n = double(v.size());
  double mean = 0, mean_abs = 0;
  for (double x : v) {
    mean += x;
    mean_abs += std::abs(x);
  }
  mean /= n;
  mean_abs /= n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double x : v) {
    double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  Moments m{mean_abs, std::sqrt(m2), 0, 0};
  if (m2 > 1e-24) {
    m.skew = m3 / (m2 * std::sqrt(m2));
    m.kurt = m4 / (m2 * m2) - 3.0;
  }
  return m;
}

// Uniform-LBP bin of a 3x3 neighborhood, enumerated from scratch.
inline int lbp_bin_direct(const Array2D& g, int y, int x) {
  static const int dy[8] = {-1, -1, -1, 0, 1, 1, 1, 0};
  static const int dx[8] = {-1, 0, 1, 1, 1, 0, -1, -1};
  unsigned code = 0;
  for (int i = 0; i < 8; ++i)
    if (g(y + dy[i], x + dx[i]) >= g(y, x)) code |= 1u << i;

  auto transitions = [](unsigned c) {
    unsigned rotated = ((c << 1) | (c >> 7)) & 0xffu;
    unsigned diff = c ^ rotated;
    int t = 0;
    while (diff) {
      t += int(diff & 1u);
      diff >>= 1;
    }
    return t;
  };
  if (transitions(code) > 2) return 58;
  int bin = 0;
  for (unsigned c = 0; c < code; ++c)
    if (transitions(c) <= 2) ++bin;
  return bin;
}

// Classical Jacobi eigensolver for symmetric matrices; eigenpairs sorted by
// descending eigenvalue.
inline void jacobi_eigen(Matrix a, Vector& evals, Matrix& evecs) {
  const int n = int(a.rows());
  evecs = Matrix::Identity(n, n);
  for (int sweep = 0; sweep < 100 * n * n; ++sweep) {
    int p = 0, q = 1;
    double biggest = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (std::abs(a(i, j)) > biggest) {
          biggest = std::abs(a(i, j));
          p = i;
          q = j;
        }
    if (biggest < 1e-15) break;
    double theta = 0.5 * (a(q, q) - a(p, p)) / a(p, q);
    double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
    double c = 1.0 / std::sqrt(t * t + 1), s = t * c;
    Matrix rot = Matrix::Identity(n, n);
    rot(p, p) = c;
    rot(q, q) = c;
    rot(p, q) = s;
    rot(q, p) = -s;
    a = rot.transpose() * a * rot;
    evecs = evecs * rot;
  }
  evals = a.diagonal();
  std::vector<int> order;
  for (int i = 0; i < n; ++i) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return evals[i] > evals[j]; });
  Vector ev(n);
  Matrix vecs(n, n);
  for (int i = 0; i < n; ++i) {
    ev[i] = evals[order[std::size_t(i)]];
    vecs.col(i) = evecs.col(order[std::size_t(i)]);
  }
  evals = ev;
  evecs = vecs;
}

// Largest principal angle (radians) between the column spans of two
// orthonormal bases.
inline double max_principal_angle(const Matrix& qa, const Matrix& qb) {
  Eigen::JacobiSVD<Matrix> svd(qa.transpose() * qb);
  double worst = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    double c = std::clamp(svd.singularValues()[i], -1.0, 1.0);
    worst = std::max(worst, std::acos(c));
  }
  return worst;
}

// AUC by explicit pair counting, ties worth 1/2.
inline double auc_pair_count(const std::vector<double>& scores,
                             const std::vector<int>& labels) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] == 1) continue;
      pairs += 1;
      if (scores[i] > scores[j])
        wins += 1;
      else if (scores[i] == scores[j])
        wins += 0.5;
    }
  }
  return wins / pairs;
}

// Two-sided exact binomial p-value via direct summation in long double.
inline double binomial_two_sided(long k, long n) {
  if (n == 0) return 1.0;
  auto choose = [](long nn, long kk) {
    long double c = 1;
    for (long i = 0; i < kk; ++i) c = c * (long double)(nn - i) / (long double)(i + 1);
    return c;
  };
  long double cdf = 0;
  for (long i = 0; i <= k; ++i) cdf += choose(n, i);
  long double p = 2.0L * cdf / std::pow(2.0L, (long double)n);
  return double(std::min(p, (long double)1.0L));
}

// Chi-squared(1) upper tail by Simpson quadrature of the density.
inline double chi2_1_tail_quadrature(double x) {
  auto pdf = [](double t) {
    return std::exp(-t / 2.0) / std::sqrt(2.0 * M_PI * t);
  };
  const double upper = x + 200.0;
  const int steps = 400000;  // even
  const double h = (upper - x) / steps;
  double acc = pdf(x + 1e-12) + pdf(upper);
  for (int i = 1; i < steps; ++i) acc += pdf(x + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// One separable orthonormal Haar analysis level, direct loops.
struct HaarOracle {
  Array2D ll, lh, hl, hh;
};

inline HaarOracle haar_direct(const Array2D& x) {
  const int h2 = int(x.rows()) / 2, w2 = int(x.cols()) / 2;
  HaarOracle o;
  o.ll.resize(h2, w2);
  o.lh.resize(h2, w2);
  o.hl.resize(h2, w2);
  o.hh.resize(h2, w2);
  for (int i = 0; i < h2; ++i) {
    for (int j = 0; j < w2; ++j) {
      double a = x(2 * i, 2 * j), b = x(2 * i, 2 * j + 1);
      double c = x(2 * i + 1, 2 * j), d = x(2 * i + 1, 2 * j + 1);
      o.ll(i, j) = 0.5 * (a + b + c + d);
      o.lh(i, j) = 0.5 * (a - b + c - d);  // high-pass along x
      o.hl(i, j) = 0.5 * (a + b - c - d);  // high-pass along y
      o.hh(i, j) = 0.5 * (a - b - c + d);
    }
  }
  return o;
}

// Boundary/interior gradient ratio, direct loops.
inline double blockiness_direct(const Array2D& g) {
  double bs = 0, bc = 0, os = 0, oc = 0;
  for (int y = 0; y < g.rows(); ++y)
    for (int x = 0; x + 1 < g.cols(); ++x) {
      double d = std::abs(g(y, x) - g(y, x + 1));
      if (x % 8 == 7) {
        bs += d;
        bc += 1;
      } else {
        os += d;
        oc += 1;
      }
    }
  for (int x = 0; x < g.cols(); ++x)
    for (int y = 0; y + 1 < g.rows(); ++y) {
      double d = std::abs(g(y, x) - g(y + 1, x));
      if (y % 8 == 7) {
        bs += d;
        bc += 1;
      } else {
        os += d;
        oc += 1;
      }
    }
  if (oc == 0 || os <= 0) return 1.0;
  return (bs / bc) / (os / oc);
}

}  // namespace oracles
