#include "fct/shares.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fct/error.hpp"

namespace fct {

namespace {

std::size_t product(const std::vector<std::size_t>& v) {
  std::size_t p = 1;
  for (auto x : v) p *= x;
  return p;
}

}  // namespace

std::size_t ShareVector::tasks() const { return product(shares); }

std::vector<double> star_shares(std::size_t k, const std::vector<double>& dim_sizes) {
  if (k < 1) throw Error(ErrorCode::InvalidInput, "k must be at least 1");
  if (dim_sizes.empty()) return {};
  double log_prod = 0;
  for (double s : dim_sizes) {
    if (!(s >= 1)) throw Error(ErrorCode::InvalidInput, "dimension size below 1");
    log_prod += std::log(s);
  }
  const double m = static_cast<double>(dim_sizes.size());
  const double scale = std::exp((std::log(static_cast<double>(k)) - log_prod) / m);
  std::vector<double> out;
  out.reserve(dim_sizes.size());
  for (double s : dim_sizes) out.push_back(s * scale);
  return out;
}

TriangleShares triangle_shares(double k, double r, double s, double t) {
  if (!(k > 0 && r > 0 && s > 0 && t > 0)) {
    throw Error(ErrorCode::InvalidInput, "triangle shares need positive k, r, s, t");
  }
  return {std::cbrt(k * r * t / (s * s)), std::cbrt(k * r * s / (t * t)),
          std::cbrt(k * s * t / (r * r))};
}

double triangle_cost(const TriangleShares& sh, double r, double s, double t) {
  return r * sh.c + s * sh.a + t * sh.b;
}

double dimension_load(const std::vector<std::size_t>& shares,
                      const std::vector<double>& dim_sizes) {
  double j = 0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    j += dim_sizes[i] / static_cast<double>(shares[i]);
  }
  return j;
}

namespace {

// Lowers shares until the product fits k, always picking the decrement that
// raises the load least.
void fit_product(std::vector<std::size_t>& a, std::size_t k, const std::vector<double>& sizes) {
  const std::size_t m = a.size();
  while (product(a) > k) {
    std::size_t best = m;
    double best_load = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      if (a[i] <= 1) continue;
      --a[i];
      double load = dimension_load(a, sizes);
      ++a[i];
      if (load < best_load) {
        best_load = load;
        best = i;
      }
    }
    --a[best];
  }
}

void grow(std::vector<std::size_t>& a, std::size_t k, const std::vector<double>& sizes) {
  const std::size_t m = a.size();
  while (true) {
    const double current = dimension_load(a, sizes);
    const std::size_t p = product(a);
    std::size_t best = m;
    double best_gain = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (p / a[i] * (a[i] + 1) > k) continue;
      ++a[i];
      double gain = current - dimension_load(a, sizes);
      --a[i];
      if (gain > best_gain) {
        best_gain = gain;
        best = i;
      }
    }
    if (best == m) break;
    ++a[best];
  }
}

// Continuous optimum under a_i >= 1: shares that would drop below one are
// pinned there and the remaining dimensions re-solved with the same k.
std::vector<double> bounded_real(const std::vector<double>& real, std::size_t k,
                                 const std::vector<double>& sizes) {
  const std::size_t m = real.size();
  std::vector<double> out = real;
  std::vector<bool> pinned(m, false);
  for (bool changed = true; changed;) {
    changed = false;
    double log_prod = 0;
    std::size_t free = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (pinned[i]) continue;
      log_prod += std::log(sizes[i]);
      ++free;
    }
    if (free == 0) break;
    const double scale =
        std::exp((std::log(static_cast<double>(k)) - log_prod) / static_cast<double>(free));
    for (std::size_t i = 0; i < m; ++i) {
      if (pinned[i]) continue;
      out[i] = sizes[i] * scale;
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (!pinned[i] && out[i] < 1) {
        pinned[i] = true;
        out[i] = 1;
        changed = true;
      }
    }
  }
  return out;
}

}  // namespace

std::vector<std::size_t> integerize_shares(const std::vector<double>& real_in, std::size_t k,
                                           const std::vector<double>& dim_sizes) {
  const std::size_t m = real_in.size();
  const std::vector<double>& sizes = dim_sizes.empty() ? real_in : dim_sizes;
  const std::vector<double> real = bounded_real(real_in, k, sizes);
  std::vector<std::size_t> floors(m);
  for (std::size_t i = 0; i < m; ++i) {
    floors[i] = real[i] < 1 ? 1 : static_cast<std::size_t>(std::floor(real[i] + 1e-9));
  }

  std::vector<std::size_t> best = floors;
  fit_product(best, k, sizes);
  grow(best, k, sizes);
  double best_load = dimension_load(best, sizes);

  // Greedy growth from the floors can stall far from k; the rounding
  // neighbours (ceil on a subset of dimensions) are tried as well.
  const std::size_t variants = m < 12 ? (std::size_t{1} << m) : 1;
  for (std::size_t bits = 1; bits < variants; ++bits) {
    std::vector<std::size_t> a = floors;
    for (std::size_t i = 0; i < m; ++i) {
      if ((bits >> i) & 1u) a[i] = static_cast<std::size_t>(std::ceil(std::max(real[i], 1.0)));
    }
    fit_product(a, k, sizes);
    grow(a, k, sizes);
    double load = dimension_load(a, sizes);
    if (load < best_load - 1e-12 * best_load) {
      best = std::move(a);
      best_load = load;
    }
  }

  // Exchange moves: lower one share, raise another as far as it fits, then
  // regrow.
  for (bool improved = true; improved;) {
    improved = false;
    for (std::size_t i = 0; i < m && !improved; ++i) {
      if (best[i] <= 1) continue;
      for (std::size_t j = 0; j < m && !improved; ++j) {
        std::vector<std::size_t> a = best;
        --a[i];
        if (j != i) {
          while (product(a) / a[j] * (a[j] + 1) <= k) ++a[j];
        }
        grow(a, k, sizes);
        double load = dimension_load(a, sizes);
        if (load < best_load - 1e-12 * best_load) {
          best = std::move(a);
          best_load = load;
          improved = true;
        }
      }
    }
  }
  return best;
}

CostEstimate communication_cost(const std::vector<std::size_t>& shares, double fact_size,
                                const std::vector<double>& dim_sizes) {
  if (shares.size() != dim_sizes.size()) {
    throw Error(ErrorCode::InvalidInput, "share and size vectors differ in length");
  }
  CostEstimate est;
  est.breakdown.push_back(fact_size);
  est.value = fact_size;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    double rep = 1;
    for (std::size_t j = 0; j < shares.size(); ++j) {
      if (j != i) rep *= static_cast<double>(shares[j]);
    }
    est.breakdown.push_back(dim_sizes[i] * rep);
    est.value += dim_sizes[i] * rep;
  }
  return est;
}

ShareVector plan_shares(std::size_t k, const std::vector<double>& dim_sizes) {
  ShareVector sv;
  sv.k = k;
  sv.real = star_shares(k, dim_sizes);
  sv.shares = integerize_shares(sv.real, k, dim_sizes);
  return sv;
}

}  // namespace fct
