#ifndef RDACPPO_SAVGOL_HPP_
#define RDACPPO_SAVGOL_HPP_

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace rdacppo::smoothing {

// Value at offset `at` of the degree-k least-squares polynomial through
// (x_j, y_j), x_j = j - center, found by projecting y onto an orthonormal
// polynomial basis built over the window points.
inline double local_poly_value(std::span<const double> y, int center, int order, double at) {
  const int n = static_cast<int>(y.size());
  // Orthonormal polynomial basis evaluated on the window points.
  std::vector<std::vector<double>> basis;
  std::vector<double> at_values;
  for (int d = 0; d <= order; ++d) {
    std::vector<double> q(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) q[j] = std::pow(static_cast<double>(j - center), d);
    double q_at = std::pow(at, d);
    // Two Gram-Schmidt passes for stability.
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t b = 0; b < basis.size(); ++b) {
        double dot = 0.0;
        for (int j = 0; j < n; ++j) dot += q[j] * basis[b][j];
        for (int j = 0; j < n; ++j) q[j] -= dot * basis[b][j];
        q_at -= dot * at_values[b];
      }
    }
    double norm = 0.0;
    for (double v : q) norm += v * v;
    norm = std::sqrt(norm);
    if (norm < 1e-12) continue;  // rank deficient window (fewer points than order + 1)
    for (double& v : q) v /= norm;
    basis.push_back(std::move(q));
    at_values.push_back(q_at / norm);
  }
  double out = 0.0;
  for (std::size_t b = 0; b < basis.size(); ++b) {
    double coef = 0.0;
    for (int j = 0; j < n; ++j) coef += basis[b][j] * y[j];
    out += coef * at_values[b];
  }
  return out;
}

// Savitzky-Golay smoothing with an odd window and polynomial order < window.
// Near the edges the window shrinks symmetrically to the largest centered
// window that fits, and the order drops to at most (points - 1) there, so the
// filter stays exact on polynomials of degree <= order everywhere.
inline std::vector<double> savgol(std::span<const double> y, int window, int order) {
  if (window < 1 || window % 2 == 0) throw std::invalid_argument("savgol: window must be odd and >= 1");
  if (order < 0 || order >= window) throw std::invalid_argument("savgol: order must lie in [0, window)");
  const int n = static_cast<int>(y.size());
  std::vector<double> out(static_cast<std::size_t>(n));
  const int half = window / 2;
  for (int i = 0; i < n; ++i) {
    const int h = std::min({half, i, n - 1 - i});
    const auto win = y.subspan(static_cast<std::size_t>(i - h), static_cast<std::size_t>(2 * h + 1));
    out[static_cast<std::size_t>(i)] = local_poly_value(win, h, std::min(order, 2 * h), 0.0);
  }
  return out;
}

}  // namespace rdacppo::smoothing

#endif  // RDACPPO_SAVGOL_HPP_
