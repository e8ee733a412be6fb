#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace mqc {

// Search budget for the criterion maximizations. Restart points are drawn
// sequentially from one stream, so enlarging n_restarts keeps the earlier
// starts and the best value can only improve.
struct OptimizerConfig {
  int n_restarts = 24;
  int max_iterations = 400;  // per restart
  double tolerance = 1e-9;
  bool include_identity_start = true;
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Downhill simplex with dimension-adaptive coefficients. Derivative-free on
// purpose: the criterion objectives carry |.| and sqrt kinks.
template <typename F>
SimplexResult nelder_mead_minimize(F&& f, const std::vector<double>& x0, double step,
                                   int max_iterations, double tolerance) {
  const int n = static_cast<int>(x0.size());
  const double refl = 1.0;
  const double expa = 1.0 + 2.0 / n;
  const double contr = 0.75 - 0.5 / n;
  const double shrink = 1.0 - 1.0 / n;

  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  for (int i = 0; i < n; ++i) pts[i + 1][i] += step;
  for (int i = 0; i <= n; ++i) vals[i] = f(pts[i]);

  std::vector<int> order(n + 1);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);

  SimplexResult out;
  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return vals[a] < vals[b]; });
    const int best = order[0];
    const int worst = order[n];
    const int second_worst = order[n - 1];
    if (vals[worst] - vals[best] <= tolerance * (1.0 + std::abs(vals[best]))) {
      out.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (int i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (int d = 0; d < n; ++d) centroid[d] += pts[i][d];
    }
    for (int d = 0; d < n; ++d) centroid[d] /= n;

    for (int d = 0; d < n; ++d) xr[d] = centroid[d] + refl * (centroid[d] - pts[worst][d]);
    const double fr = f(xr);

    if (fr < vals[best]) {
      for (int d = 0; d < n; ++d) xe[d] = centroid[d] + expa * (xr[d] - centroid[d]);
      const double fe = f(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second_worst]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    if (fr < vals[worst]) {
      for (int d = 0; d < n; ++d) xc[d] = centroid[d] + contr * (xr[d] - centroid[d]);
      const double fc = f(xc);
      if (fc <= fr) {
        pts[worst] = xc;
        vals[worst] = fc;
        continue;
      }
    } else {
      for (int d = 0; d < n; ++d) xc[d] = centroid[d] - contr * (centroid[d] - pts[worst][d]);
      const double fc = f(xc);
      if (fc < vals[worst]) {
        pts[worst] = xc;
        vals[worst] = fc;
        continue;
      }
    }
    for (int i = 0; i <= n; ++i) {
      if (i == order[0]) continue;
      for (int d = 0; d < n; ++d) {
        pts[i][d] = pts[order[0]][d] + shrink * (pts[i][d] - pts[order[0]][d]);
      }
      vals[i] = f(pts[i]);
    }
  }

  int best = 0;
  for (int i = 1; i <= n; ++i) {
    if (vals[i] < vals[best]) best = i;
  }
  out.x = pts[best];
  out.value = vals[best];
  out.iterations = iter;
  return out;
}

}  // namespace mqc
