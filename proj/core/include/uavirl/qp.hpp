#pragma once

#include <span>
#include <vector>

#include "uavirl/world.hpp"

namespace uavirl {

enum class QpStatus { Optimal, Infeasible };

struct QpSolution {
  FeatureVector w{};
  QpStatus status = QpStatus::Infeasible;
  // Lagrange multipliers in constraint order: expert first, then learners.
  std::vector<double> multipliers;
  double kkt_residual = 0.0;
  int iterations = 0;
};

// Minimum-norm separating weights:
//   min ||w||^2  s.t.  w.mu_E >= 1,  w.mu_i <= -1 for every learner mu_i.
// Solved as the minimum-norm point of the convex hull of the rows
// {mu_E, -mu_1, ..., -mu_n}; the hull contains the origin exactly when the
// problem is infeasible. Throws NumericError on non-convergence.
QpSolution solve_min_norm_svm(const FeatureVector& mu_expert, std::span<const FeatureVector> mu_learners);

// Same problem for arbitrary dimension; rows are the constraint vectors a_i in a_i.w >= 1.
struct MinNormResult {
  std::vector<double> w;
  std::vector<double> multipliers;
  bool feasible = false;
  double kkt_residual = 0.0;
  int iterations = 0;
};
MinNormResult solve_min_norm_halfspaces(const std::vector<std::vector<double>>& rows);

// Max over stationarity, primal feasibility, dual feasibility and
// complementary slackness violations for a_i.w >= 1.
double kkt_residual(const std::vector<std::vector<double>>& rows, const std::vector<double>& w,
                    const std::vector<double>& multipliers);

}  // namespace uavirl
