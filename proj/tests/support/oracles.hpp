// Copyright 2026 The GroupScope Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GROUPSCOPE_TEST_ORACLES_HPP_
#define GROUPSCOPE_TEST_ORACLES_HPP_

// Reference computations written independently of the library code.

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<long double>>;

// Gauss-Jordan inverse with partial pivoting; empty when singular.
inline std::optional<Matrix> inverse(Matrix a) {
  const size_t n = a.size();
  Matrix inv(n, std::vector<long double>(n, 0.0L));
  for (size_t i = 0; i < n; ++i) inv[i][i] = 1.0L;
  for (size_t c = 0; c < n; ++c) {
    size_t piv = c;
    for (size_t r = c + 1; r < n; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    if (std::fabs(a[piv][c]) < 1e-14L) return std::nullopt;
    std::swap(a[c], a[piv]);
    std::swap(inv[c], inv[piv]);
    long double d = a[c][c];
    for (size_t j = 0; j < n; ++j) {
      a[c][j] /= d;
      inv[c][j] /= d;
    }
    for (size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      long double f = a[r][c];
      if (f == 0.0L) continue;
      for (size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

inline std::optional<std::vector<long double>> solve(const Matrix& a, const std::vector<long double>& b) {
  auto inv = inverse(a);
  if (!inv) return std::nullopt;
  std::vector<long double> x(b.size(), 0.0L);
  for (size_t i = 0; i < b.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) x[i] += (*inv)[i][j] * b[j];
  return x;
}

// ---------------------------------------------------------------------------
// One-class SVM dual by active-set enumeration:
//   min 1/2 a'Ka  s.t.  0 <= a_i <= C,  sum a = 1.
// Every split of the indices into lower-bound, upper-bound and free sets with
// |upper| <= 1/C and |free| <= max_free is tried; the KKT system of the free
// set is solved and the first split satisfying all KKT conditions is kept.

struct DualSolution {
  std::vector<double> alphas;
  double rho = 0.0;
  size_t free_count = 0;
};

inline std::optional<DualSolution> ocsvm_dual(const std::vector<std::vector<double>>& K, double nu,
                                              size_t max_free = 4, double tol = 1e-9) {
  const size_t n = K.size();
  const long double C = 1.0L / (static_cast<long double>(nu) * n);
  const size_t max_upper = static_cast<size_t>(std::floor(1.0L / C + 1e-12L));

  std::vector<int> state(n, 0);  // 0 lower, 1 upper, 2 free
  std::optional<DualSolution> found;

  auto check = [&]() -> bool {
    std::vector<size_t> F, U;
    for (size_t i = 0; i < n; ++i) {
      if (state[i] == 2) F.push_back(i);
      if (state[i] == 1) U.push_back(i);
    }
    if (F.empty()) return false;
    const size_t f = F.size();
    Matrix A(f + 1, std::vector<long double>(f + 1, 0.0L));
    std::vector<long double> b(f + 1, 0.0L);
    for (size_t r = 0; r < f; ++r) {
      for (size_t c = 0; c < f; ++c) A[r][c] = K[F[r]][F[c]];
      A[r][f] = -1.0L;
      for (size_t u : U) b[r] -= C * K[F[r]][u];
    }
    for (size_t c = 0; c < f; ++c) A[f][c] = 1.0L;
    b[f] = 1.0L - C * U.size();
    auto x = solve(A, b);
    if (!x) return false;
    std::vector<long double> a(n, 0.0L);
    for (size_t u : U) a[u] = C;
    for (size_t r = 0; r < f; ++r) {
      if ((*x)[r] <= tol || (*x)[r] >= C - tol) return false;
      a[F[r]] = (*x)[r];
    }
    long double rho = (*x)[f];
    for (size_t i = 0; i < n; ++i) {
      long double g = 0.0L;
      for (size_t j = 0; j < n; ++j) g += K[i][j] * a[j];
      if (state[i] == 0 && g < rho - 1e-9L) return false;
      if (state[i] == 1 && g > rho + 1e-9L) return false;
    }
    DualSolution s;
    for (auto v : a) s.alphas.push_back(static_cast<double>(v));
    s.rho = static_cast<double>(rho);
    s.free_count = f;
    found = s;
    return true;
  };

  std::function<bool(size_t, size_t, size_t)> rec = [&](size_t i, size_t upper, size_t free) -> bool {
    if (i == n) return check();
    for (int s : {0, 1, 2}) {
      if (s == 1 && upper == max_upper) continue;
      if (s == 2 && free == max_free) continue;
      state[i] = s;
      if (rec(i + 1, upper + (s == 1), free + (s == 2))) return true;
    }
    state[i] = 0;
    return false;
  };
  rec(0, 0, 0);
  return found;
}

inline double linear_kernel(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Twelve points around (3, 3); with nu = 0.25 the dual has two free and two
// bounded support vectors.
inline std::vector<std::vector<double>> twelve_points() {
  return {{3.0, 3.2}, {2.6, 3.5}, {3.4, 2.7}, {2.9, 2.6}, {3.8, 3.3}, {3.1, 4.0},
          {2.2, 2.9}, {3.5, 3.7}, {2.7, 2.1}, {4.1, 2.8}, {1.9, 3.6}, {3.3, 3.0}};
}

// 200 draws from a 2D standard normal.
inline std::vector<std::vector<double>> gaussian_cloud(size_t n = 200, uint64_t seed = 20260418) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<std::vector<double>> out(n);
  for (auto& p : out) {
    double a = z(rng);
    double b = z(rng);
    p = {a, b};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Keyness

// G2 = 2 sum O ln(O/E) over the four cells of
//   [a, b]   a = target count,     b = reference count
//   [c, d]   c = target rest,      d = reference rest
inline double g2_four_cell(double a, double target_total, double b, double reference_total) {
  double c = target_total - a, d = reference_total - b;
  double n = target_total + reference_total;
  double row1 = a + b, row2 = c + d;
  double cells[4] = {a, b, c, d};
  double expected[4] = {row1 * target_total / n, row1 * reference_total / n, row2 * target_total / n,
                        row2 * reference_total / n};
  double g = 0.0;
  for (int i = 0; i < 4; ++i)
    if (cells[i] > 0) g += cells[i] * std::log(cells[i] / expected[i]);
  g *= 2.0;
  return a / target_total >= b / reference_total ? g : -g;
}

// ---------------------------------------------------------------------------
// OLS

struct OlsReference {
  std::vector<long double> beta;
  Matrix bread;  // (X'X)^-1
  std::vector<long double> residuals;
};

inline OlsReference normal_equations(const Matrix& X, const std::vector<long double>& y) {
  const size_t n = X.size(), k = X[0].size();
  Matrix xtx(k, std::vector<long double>(k, 0.0L));
  std::vector<long double> xty(k, 0.0L);
  for (size_t i = 0; i < n; ++i)
    for (size_t a = 0; a < k; ++a) {
      xty[a] += X[i][a] * y[i];
      for (size_t b = 0; b < k; ++b) xtx[a][b] += X[i][a] * X[i][b];
    }
  OlsReference r;
  r.bread = *inverse(xtx);
  r.beta.assign(k, 0.0L);
  for (size_t a = 0; a < k; ++a)
    for (size_t b = 0; b < k; ++b) r.beta[a] += r.bread[a][b] * xty[b];
  for (size_t i = 0; i < n; ++i) {
    long double fitted = 0.0L;
    for (size_t a = 0; a < k; ++a) fitted += X[i][a] * r.beta[a];
    r.residuals.push_back(y[i] - fitted);
  }
  return r;
}

// CR1: (G/(G-1)) ((n-1)/(n-k)) B [sum_g (X_g'u_g)(X_g'u_g)'] B.
inline std::vector<long double> clustered_se(const Matrix& X, const OlsReference& r,
                                             const std::vector<std::string>& clusters) {
  const size_t n = X.size(), k = X[0].size();
  std::map<std::string, std::vector<long double>> score;
  for (size_t i = 0; i < n; ++i) {
    auto& s = score[clusters[i]];
    s.resize(k, 0.0L);
    for (size_t a = 0; a < k; ++a) s[a] += X[i][a] * r.residuals[i];
  }
  Matrix meat(k, std::vector<long double>(k, 0.0L));
  for (const auto& [g, s] : score)
    for (size_t a = 0; a < k; ++a)
      for (size_t b = 0; b < k; ++b) meat[a][b] += s[a] * s[b];
  const long double G = score.size();
  const long double factor = (G / (G - 1)) * ((n - 1.0L) / (n - static_cast<long double>(k)));
  std::vector<long double> se(k);
  for (size_t j = 0; j < k; ++j) {
    long double v = 0.0L;
    for (size_t a = 0; a < k; ++a)
      for (size_t b = 0; b < k; ++b) v += r.bread[j][a] * meat[a][b] * r.bread[b][j];
    se[j] = std::sqrt(factor * v);
  }
  return se;
}

// HC1: (n/(n-k)) B [sum_i x_i x_i' u_i^2] B.
inline std::vector<long double> hc1_se(const Matrix& X, const OlsReference& r) {
  const size_t n = X.size(), k = X[0].size();
  Matrix meat(k, std::vector<long double>(k, 0.0L));
  for (size_t i = 0; i < n; ++i)
    for (size_t a = 0; a < k; ++a)
      for (size_t b = 0; b < k; ++b) meat[a][b] += X[i][a] * X[i][b] * r.residuals[i] * r.residuals[i];
  const long double factor = static_cast<long double>(n) / (n - static_cast<long double>(k));
  std::vector<long double> se(k);
  for (size_t j = 0; j < k; ++j) {
    long double v = 0.0L;
    for (size_t a = 0; a < k; ++a)
      for (size_t b = 0; b < k; ++b) v += r.bread[j][a] * meat[a][b] * r.bread[b][j];
    se[j] = std::sqrt(factor * v);
  }
  return se;
}

}  // namespace oracle

#endif  // GROUPSCOPE_TEST_ORACLES_HPP_
