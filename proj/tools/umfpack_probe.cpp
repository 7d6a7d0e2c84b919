// Configure-time check that UMFPACK (and the BLAS behind it) solves a small
// diagonally dominant system correctly. Exit code 0 on success.

#include <umfpack.h>

#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

int main() {
  const int n = 2000, per_col = 6;
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> row(0, n - 1);
  std::uniform_real_distribution<double> val(-0.5, 0.5);
  std::vector<int> ap{0}, ai;
  std::vector<double> ax;
  for (int j = 0; j < n; ++j) {
    std::vector<double> col(n, 0.0);
    col[j] = 4.0;
    for (int k = 0; k < per_col; ++k) col[row(rng)] += val(rng);
    for (int i = 0; i < n; ++i)
      if (col[i] != 0.0) {
        ai.push_back(i);
        ax.push_back(col[i]);
      }
    ap.push_back(static_cast<int>(ai.size()));
  }
  std::vector<double> b(n, 1.0), x(n, 0.0);
  void *sym = nullptr, *num = nullptr;
  if (umfpack_di_symbolic(n, n, ap.data(), ai.data(), ax.data(), &sym, nullptr, nullptr) != UMFPACK_OK) return 1;
  if (umfpack_di_numeric(ap.data(), ai.data(), ax.data(), sym, &num, nullptr, nullptr) != UMFPACK_OK) return 1;
  if (umfpack_di_solve(UMFPACK_A, ap.data(), ai.data(), ax.data(), x.data(), b.data(), num, nullptr, nullptr) != UMFPACK_OK) return 1;
  umfpack_di_free_symbolic(&sym);
  umfpack_di_free_numeric(&num);
  std::vector<double> r(b);
  for (int j = 0; j < n; ++j)
    for (int k = ap[j]; k < ap[j + 1]; ++k) r[ai[k]] -= ax[k] * x[j];
  double norm = 0.0;
  for (double v : r) norm += v * v;
  std::printf("residual %g\n", std::sqrt(norm));
  return std::sqrt(norm) < 1e-10 ? 0 : 1;
}
