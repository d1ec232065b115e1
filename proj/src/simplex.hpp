#pragma once

// Dense tableau simplex for  max c·x  s.t.  A x <= b, x >= 0, b >= 0.
// With b >= 0 the slack basis is feasible, so no phase one is needed.
// Bland's rule guarantees termination on degenerate problems.

#include <cstddef>
#include <optional>
#include <vector>

namespace qvnet::detail {

template <class T>
struct SimplexResult {
  std::vector<T> x;
  T objective{};
  std::size_t iterations = 0;
};

template <class T, class Positive>
std::optional<SimplexResult<T>> simplex_maximize(const std::vector<std::vector<T>>& a, const std::vector<T>& b,
                                                 const std::vector<T>& c, std::size_t max_iterations,
                                                 Positive is_positive) {
  const std::size_t m = a.size();
  const std::size_t n = c.size();
  const std::size_t cols = n + m + 1;  // originals, slacks, rhs
  std::vector<std::vector<T>> tab(m + 1, std::vector<T>(cols, T(0)));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) tab[i][j] = a[i][j];
    tab[i][n + i] = T(1);
    tab[i][cols - 1] = b[i];
    basis[i] = n + i;
  }
  // Objective row holds reduced costs; its rhs accumulates -z.
  for (std::size_t j = 0; j < n; ++j) tab[m][j] = c[j];

  std::size_t iter = 0;
  for (;; ++iter) {
    std::optional<std::size_t> enter;
    for (std::size_t j = 0; j + 1 < cols; ++j) {
      if (is_positive(tab[m][j])) {
        enter = j;
        break;
      }
    }
    if (!enter) break;
    if (iter >= max_iterations) return std::nullopt;
    const std::size_t q = *enter;

    std::optional<std::size_t> leave;
    T best_ratio{};
    for (std::size_t i = 0; i < m; ++i) {
      if (!is_positive(tab[i][q])) continue;
      T ratio = tab[i][cols - 1] / tab[i][q];
      if (!leave || ratio < best_ratio || (!(best_ratio < ratio) && basis[i] < basis[*leave])) {
        leave = i;
        best_ratio = ratio;
      }
    }
    // Unbounded: cannot happen for the capacity-bounded problems built here.
    if (!leave) return std::nullopt;
    const std::size_t p = *leave;

    const T pivot = tab[p][q];
    for (auto& v : tab[p]) v /= pivot;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == p) continue;
      const T factor = tab[i][q];
      if (factor == T(0)) continue;
      for (std::size_t j = 0; j < cols; ++j) tab[i][j] -= factor * tab[p][j];
    }
    basis[p] = q;
  }

  SimplexResult<T> out;
  out.x.assign(n, T(0));
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) out.x[basis[i]] = tab[i][cols - 1];
  }
  out.objective = -tab[m][cols - 1];
  out.iterations = iter;
  return out;
}

}  // namespace qvnet::detail
