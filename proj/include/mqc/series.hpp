#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mqc/errors.hpp"

namespace mqc {

// Per-separation ensemble statistics. stderr is the sample standard deviation
// over the square root of the population size; zeros count toward the mean.
struct SeriesPoint {
  int x = 0;
  double mean = 0.0;
  double stderr_value = 0.0;
  long n_total = 0;
  long n_positive = 0;
};

namespace detail {

inline double neumaier_sum(const std::vector<double>& values) {
  double sum = 0.0, comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

}  // namespace detail

inline SeriesPoint aggregate_values(int x, const std::vector<double>& values) {
  if (values.empty()) throw config_error("no rows to aggregate at x = " + std::to_string(x));
  SeriesPoint pt;
  pt.x = x;
  pt.n_total = static_cast<long>(values.size());
  pt.mean = detail::neumaier_sum(values) / static_cast<double>(pt.n_total);
  for (double v : values) {
    if (v > 0.0) ++pt.n_positive;
  }
  if (pt.n_total > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double d = values[i] - pt.mean;
      sq[i] = d * d;
    }
    const double var = detail::neumaier_sum(sq) / static_cast<double>(pt.n_total - 1);
    pt.stderr_value = std::sqrt(var / static_cast<double>(pt.n_total));
  }
  return pt;
}

// Chord length (N/pi) sin(pi x / N) on a periodic chain. Folded to
// min(x, N-x) so the sine symmetry holds bitwise.
inline double chord_length(int n_sites, double x) {
  if (!(x > 0.0 && x < n_sites)) {
    throw config_error("chord length needs 0 < x < N");
  }
  const double pi = 3.14159265358979323846;
  const double folded = std::min(x, n_sites - x);
  return (n_sites / pi) * std::sin(pi * folded / n_sites);
}

namespace detail {

inline double chord_or_zero(int n_sites, double separation) {
  double d = std::fmod(std::abs(separation), static_cast<double>(n_sites));
  if (d == 0.0) return 0.0;
  return chord_length(n_sites, d);
}

}  // namespace detail

// Conformal cross ratio w12 w34 / (w13 w24) over four dual-lattice positions.
inline double cross_ratio(int n_sites, double i1, double i2, double i3, double i4) {
  const double w13 = detail::chord_or_zero(n_sites, i3 - i1);
  const double w24 = detail::chord_or_zero(n_sites, i4 - i2);
  if (w13 == 0.0 || w24 == 0.0) {
    throw config_error("coincident positions make a denominator chord vanish");
  }
  const double w12 = detail::chord_or_zero(n_sites, i2 - i1);
  const double w34 = detail::chord_or_zero(n_sites, i4 - i3);
  return (w12 * w34) / (w13 * w24);
}

// Single-site subregions: the cross ratio collapses to 1 / w(x)^2.
inline double cross_ratio_single_site(int n_sites, double x) {
  const double w = chord_length(n_sites, x);
  return 1.0 / (w * w);
}

enum class FitDomain { Separation, CrossRatio };

struct FitOptions {
  FitDomain domain = FitDomain::Separation;
  int n_sites = 0;  // required for the cross-ratio domain
  bool exclude_last = false;
  std::set<int> exclude_x;
  std::optional<int> parity;  // 0 even, 1 odd; never mix parities for negativity fits
};

struct FitPoint {
  int x = 0;
  double t = 0.0;  // log x or log(1/eta)
  double log_mean = 0.0;
  double mean = 0.0;
  double stderr_value = 0.0;
};

struct ExcludedPoint {
  int x = 0;
  std::string reason;
};

struct FitResult {
  double alpha = 0.0;
  double alpha_err = 0.0;
  std::optional<double> alpha_weighted;      // stderr-weighted variant, when defined
  std::optional<double> alpha_weighted_err;
  std::vector<FitPoint> used;
  std::vector<ExcludedPoint> excluded;
  FitDomain domain = FitDomain::Separation;
};

// Least squares on (log distance, log mean); alpha is minus the slope. The
// unweighted fit is primary; a stderr-weighted fit is reported alongside when
// every point carries a positive error bar.
inline FitResult fit_power_law(const std::vector<SeriesPoint>& series, const FitOptions& opt) {
  if (opt.domain == FitDomain::CrossRatio && opt.n_sites < 3) {
    throw config_error("cross-ratio fits need the chain length");
  }
  FitResult out;
  out.domain = opt.domain;

  std::vector<SeriesPoint> pts = series;
  std::sort(pts.begin(), pts.end(), [](const SeriesPoint& a, const SeriesPoint& b) {
    return a.x < b.x;
  });

  std::vector<SeriesPoint> stage;
  for (const SeriesPoint& p : pts) {
    if (opt.parity && (p.x % 2 + 2) % 2 != *opt.parity) {
      out.excluded.push_back({p.x, "parity"});
    } else if (opt.exclude_x.count(p.x)) {
      out.excluded.push_back({p.x, "excluded"});
    } else {
      stage.push_back(p);
    }
  }
  if (opt.exclude_last && !stage.empty()) {
    out.excluded.push_back({stage.back().x, "last-point"});
    stage.pop_back();
  }
  std::vector<SeriesPoint> usable;
  for (const SeriesPoint& p : stage) {
    if (p.mean > 0.0) {
      usable.push_back(p);
    } else {
      out.excluded.push_back({p.x, "zero-mean"});  // log undefined; sparse-hit separation
    }
  }
  if (usable.size() < 2) {
    throw config_error("power-law fit needs at least 2 usable points, have " +
                       std::to_string(usable.size()));
  }

  for (const SeriesPoint& p : usable) {
    FitPoint fp;
    fp.x = p.x;
    fp.t = opt.domain == FitDomain::Separation
               ? std::log(static_cast<double>(p.x))
               : -std::log(cross_ratio_single_site(opt.n_sites, p.x));
    fp.log_mean = std::log(p.mean);
    fp.mean = p.mean;
    fp.stderr_value = p.stderr_value;
    out.used.push_back(fp);
  }

  const auto slope_fit = [](const std::vector<double>& t, const std::vector<double>& y,
                            const std::vector<double>& w, double& slope, double& err) {
    const std::size_t n = t.size();
    double sw = 0.0, st = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sw += w[i];
      st += w[i] * t[i];
      sy += w[i] * y[i];
    }
    const double tbar = st / sw;
    const double ybar = sy / sw;
    double stt = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      stt += w[i] * (t[i] - tbar) * (t[i] - tbar);
      sty += w[i] * (t[i] - tbar) * (y[i] - ybar);
    }
    if (stt == 0.0) throw config_error("degenerate fit: all abscissae coincide");
    slope = sty / stt;
    if (n > 2) {
      double ssr = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - ybar - slope * (t[i] - tbar);
        ssr += w[i] * r * r;
      }
      err = std::sqrt(ssr / static_cast<double>(n - 2) / stt);
    } else {
      err = 0.0;  // two-point fits are exact
    }
  };

  std::vector<double> t, y, ones;
  for (const FitPoint& p : out.used) {
    t.push_back(p.t);
    y.push_back(p.log_mean);
    ones.push_back(1.0);
  }
  double slope = 0.0, err = 0.0;
  slope_fit(t, y, ones, slope, err);
  out.alpha = -slope;
  out.alpha_err = err;

  bool weights_ok = true;
  std::vector<double> w;
  for (const FitPoint& p : out.used) {
    if (!(p.stderr_value > 0.0)) {
      weights_ok = false;
      break;
    }
    const double sigma_log = p.stderr_value / p.mean;
    w.push_back(1.0 / (sigma_log * sigma_log));
  }
  if (weights_ok) {
    double ws = 0.0, we = 0.0;
    slope_fit(t, y, w, ws, we);
    out.alpha_weighted = -ws;
    out.alpha_weighted_err = we;
  }
  return out;
}

}  // namespace mqc
