#include "uavirl/qp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "uavirl/errors.hpp"

namespace uavirl {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Solves A x = b in place with partial pivoting. Returns false if singular.
bool gauss_solve(std::vector<std::vector<double>> a, std::vector<double>& b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-300) return false;
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * b[c];
    b[i] = s / a[i][i];
  }
  return true;
}

// Minimum-norm point of the affine hull of the selected points, as affine weights.
std::vector<double> affine_min_norm(const std::vector<std::vector<double>>& pts, const std::vector<std::size_t>& corral) {
  const std::size_t k = corral.size();
  std::vector<std::vector<double>> m(k + 1, std::vector<double>(k + 1, 0.0));
  std::vector<double> rhs(k + 1, 0.0);
  double scale = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) m[i][j] = dot(pts[corral[i]], pts[corral[j]]);
    scale = std::max(scale, m[i][i]);
    m[i][k] = 1.0;
    m[k][i] = 1.0;
  }
  rhs[k] = 1.0;
  // Equilibrate the Gram block so the bordered system stays well scaled.
  const double s = scale > 0.0 ? scale : 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) m[i][j] /= s;
  }
  if (!gauss_solve(m, rhs)) throw NumericError("min-norm QP: singular affine subproblem");
  rhs.resize(k);
  return rhs;
}

std::vector<double> combine(const std::vector<std::vector<double>>& pts, const std::vector<std::size_t>& corral,
                            const std::vector<double>& weights) {
  std::vector<double> x(pts.front().size(), 0.0);
  for (std::size_t i = 0; i < corral.size(); ++i) {
    for (std::size_t d = 0; d < x.size(); ++d) x[d] += weights[i] * pts[corral[i]][d];
  }
  return x;
}

}  // namespace

double kkt_residual(const std::vector<std::vector<double>>& rows, const std::vector<double>& w,
                    const std::vector<double>& multipliers) {
  double res = 0.0;
  // Stationarity of ||w||^2 - sum lambda_i (a_i.w - 1): 2w = sum lambda_i a_i.
  std::vector<double> g(w.size());
  for (std::size_t d = 0; d < w.size(); ++d) g[d] = 2.0 * w[d];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t d = 0; d < w.size(); ++d) g[d] -= multipliers[i] * rows[i][d];
    const double slack = dot(rows[i], w) - 1.0;
    res = std::max(res, std::max(0.0, -slack));
    res = std::max(res, std::max(0.0, -multipliers[i]));
    res = std::max(res, std::abs(multipliers[i] * slack));
  }
  for (double v : g) res = std::max(res, std::abs(v));
  return res;
}

MinNormResult solve_min_norm_halfspaces(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ContractError("min-norm QP: no constraints");
  const std::size_t m = rows.size();
  const std::size_t n = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != n) throw ContractError("min-norm QP: ragged constraint rows");
    for (double v : r) {
      if (!std::isfinite(v)) throw NumericError("min-norm QP: non-finite input");
    }
  }

  double max_sq = 0.0;
  std::size_t start = 0;
  double best_sq = INFINITY;
  for (std::size_t i = 0; i < m; ++i) {
    const double sq = dot(rows[i], rows[i]);
    max_sq = std::max(max_sq, sq);
    if (sq < best_sq) {
      best_sq = sq;
      start = i;
    }
  }

  MinNormResult out;
  out.w.assign(n, 0.0);
  out.multipliers.assign(m, 0.0);
  if (max_sq == 0.0) return out;  // every row is zero: a.w >= 1 is impossible

  constexpr double kOptTol = 1e-15;
  constexpr double kWeightTol = 1e-13;
  const double zero_tol = 1e-22 * max_sq;
  const int max_iters = 50 * static_cast<int>(m + n) + 100;

  std::vector<std::size_t> corral{start};
  std::vector<double> lam{1.0};
  std::vector<double> x = rows[start];

  int iter = 0;
  bool converged = false;
  for (; iter < max_iters; ++iter) {
    const double xx = dot(x, x);
    if (xx <= zero_tol) {
      converged = true;
      break;
    }
    std::size_t j = 0;
    double best = INFINITY;
    for (std::size_t i = 0; i < m; ++i) {
      const double v = dot(x, rows[i]);
      if (v < best) {
        best = v;
        j = i;
      }
    }
    if (xx - best <= kOptTol * max_sq) {
      converged = true;
      break;
    }
    if (std::find(corral.begin(), corral.end(), j) != corral.end()) {
      converged = true;
      break;
    }
    corral.push_back(j);
    lam.push_back(0.0);

    for (int minor = 0; minor < max_iters; ++minor) {
      const std::vector<double> alpha = affine_min_norm(rows, corral);
      if (std::all_of(alpha.begin(), alpha.end(), [](double a) { return a > kWeightTol; })) {
        lam = alpha;
        x = combine(rows, corral, lam);
        break;
      }
      double theta = 1.0;
      for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (alpha[i] <= kWeightTol) {
          const double denom = lam[i] - alpha[i];
          if (denom > 0.0) theta = std::min(theta, lam[i] / denom);
        }
      }
      for (std::size_t i = 0; i < lam.size(); ++i) lam[i] = theta * alpha[i] + (1.0 - theta) * lam[i];
      std::vector<std::size_t> kept;
      std::vector<double> kept_lam;
      for (std::size_t i = 0; i < lam.size(); ++i) {
        if (lam[i] > kWeightTol) {
          kept.push_back(corral[i]);
          kept_lam.push_back(lam[i]);
        }
      }
      if (kept.empty()) throw NumericError("min-norm QP: active set collapsed");
      const double total = std::accumulate(kept_lam.begin(), kept_lam.end(), 0.0);
      for (double& l : kept_lam) l /= total;
      corral = std::move(kept);
      lam = std::move(kept_lam);
      x = combine(rows, corral, lam);
    }
  }
  out.iterations = iter;
  if (!converged) throw NumericError("min-norm QP: no convergence after " + std::to_string(iter) + " iterations");

  const double xx = dot(x, x);
  if (xx <= 1e-18 * max_sq) return out;  // origin lies in the hull

  out.feasible = true;
  for (std::size_t d = 0; d < n; ++d) out.w[d] = x[d] / xx;
  for (std::size_t i = 0; i < corral.size(); ++i) out.multipliers[corral[i]] = 2.0 * lam[i] / xx;
  out.kkt_residual = kkt_residual(rows, out.w, out.multipliers);
  return out;
}

QpSolution solve_min_norm_svm(const FeatureVector& mu_expert, std::span<const FeatureVector> mu_learners) {
  std::vector<std::vector<double>> rows;
  rows.emplace_back(mu_expert.begin(), mu_expert.end());
  for (const FeatureVector& mu : mu_learners) {
    std::vector<double> r(mu.begin(), mu.end());
    for (double& v : r) v = -v;
    rows.push_back(std::move(r));
  }
  const MinNormResult r = solve_min_norm_halfspaces(rows);
  QpSolution sol;
  sol.status = r.feasible ? QpStatus::Optimal : QpStatus::Infeasible;
  std::copy(r.w.begin(), r.w.end(), sol.w.begin());
  sol.multipliers = r.multipliers;
  sol.kkt_residual = r.kkt_residual;
  sol.iterations = r.iterations;
  return sol;
}

}  // namespace uavirl
