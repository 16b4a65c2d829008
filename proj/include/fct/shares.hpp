#pragma once

#include <cstddef>
#include <vector>

namespace fct {

/// Bucket counts per dimension. `real` is the continuous optimum (product k),
/// `shares` its integer form (product <= k).
struct ShareVector {
  std::vector<double> real;
  std::vector<std::size_t> shares;
  std::size_t k = 1;

  std::size_t tasks() const;
};

/// a_i = s_i * (k / prod s_j)^(1/m). Throws InvalidInput on k < 1 or a size < 1.
std::vector<double> star_shares(std::size_t k, const std::vector<double>& dim_sizes);

struct TriangleShares {
  double a;
  double b;
  double c;
};

/// Shares for R(A,B) x S(B,C) x T(A,C) with a*b*c = k; cost r*c + s*a + t*b.
TriangleShares triangle_shares(double k, double r, double s, double t);
double triangle_cost(const TriangleShares& sh, double r, double s, double t);

/// Floors every share to at least 1, lowers shares until the product fits
/// k, then repeatedly raises the share that most reduces the per-task
/// dimension load sum(s_i / a_i) while the product stays <= k. Ties go to
/// the lowest index. When dim_sizes is empty the real shares stand in for
/// the sizes (they are proportional).
std::vector<std::size_t> integerize_shares(const std::vector<double>& real, std::size_t k,
                                           const std::vector<double>& dim_sizes = {});

/// sum(s_i / a_i): dimension tuples a single task receives.
double dimension_load(const std::vector<std::size_t>& shares,
                      const std::vector<double>& dim_sizes);

struct CostEstimate {
  double value = 0;
  /// Fact term first, then one replication term per dimension.
  std::vector<double> breakdown;
};

/// r + sum_i s_i * prod_{j != i} a_j.
CostEstimate communication_cost(const std::vector<std::size_t>& shares, double fact_size,
                                const std::vector<double>& dim_sizes);

/// star_shares followed by integerize_shares.
ShareVector plan_shares(std::size_t k, const std::vector<double>& dim_sizes);

}  // namespace fct
