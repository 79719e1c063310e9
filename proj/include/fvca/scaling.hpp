#pragma once

#include <algorithm>
#include <iostream>

#include "common.hpp"

namespace fvca {

struct CurvePoint {
  double x, y, err = 0.0;
};

struct Curve {
  double label = 0.0;  // T (temperature mode) or L (size mode)
  std::vector<CurvePoint> pts;  // sorted by x
};

struct CurveFamily {
  std::vector<Curve> curves;
  void validate() const {
    if (curves.size() < 2) throw ConfigError("curve family needs >= 2 curves");
    for (const auto& c : curves) {
      if (c.pts.size() < 4) throw ConfigError("each curve needs >= 4 points");
      for (size_t i = 1; i < c.pts.size(); ++i)
        if (c.pts[i].x <= c.pts[i - 1].x) throw ConfigError("curve abscissae must be increasing");
    }
  }
};

namespace detail {
inline double lin_interp(const Curve& c, double x) {
  const auto& p = c.pts;
  auto it = std::lower_bound(p.begin(), p.end(), x,
                             [](const CurvePoint& a, double v) { return a.x < v; });
  if (it == p.begin()) return p.front().y;
  if (it == p.end()) return p.back().y;
  const CurvePoint &b = *it, &a = *(it - 1);
  return a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x);
}

// monotone cubic (Fritsch-Carlson) interpolant
struct Pchip {
  std::vector<double> x, y, m;
  Pchip(const std::vector<double>& xs, const std::vector<double>& ys) : x(xs), y(ys) {
    const size_t n = x.size();
    std::vector<double> d(n - 1);
    for (size_t i = 0; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    m.resize(n);
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for (size_t i = 1; i + 1 < n; ++i) {
      if (d[i - 1] * d[i] <= 0.0)
        m[i] = 0.0;
      else {
        double w1 = 2.0 * (x[i + 1] - x[i]) + (x[i] - x[i - 1]);
        double w2 = (x[i + 1] - x[i]) + 2.0 * (x[i] - x[i - 1]);
        m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
      }
    }
    for (size_t i = 0; i + 1 < n; ++i) {
      if (d[i] == 0.0) {
        m[i] = m[i + 1] = 0.0;
        continue;
      }
      double a = m[i] / d[i], b = m[i + 1] / d[i];
      double s = a * a + b * b;
      if (s > 9.0) {
        double t = 3.0 / std::sqrt(s);
        m[i] = t * a * d[i];
        m[i + 1] = t * b * d[i];
      }
    }
  }
  double operator()(double t) const {
    auto it = std::upper_bound(x.begin(), x.end(), t);
    size_t i = it == x.begin() ? 0 : (size_t)(it - x.begin()) - 1;
    if (i + 1 >= x.size()) i = x.size() - 2;
    double h = x[i + 1] - x[i], s = (t - x[i]) / h;
    double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * y[i] + h10 * h * m[i] + h01 * y[i + 1] + h11 * h * m[i + 1];
  }
};

// golden-section minimum of f on [a, b]
template <class F>
inline double golden_min(F f, double a, double b, int iters = 80) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}
}  // namespace detail

struct CrossingResult {
  double eps_c = 0.0, spread = 0.0;
  int pairs_used = 0;
};

// mean abscissa of pairwise curve intersections (linear interpolation)
inline CrossingResult crossing_point(const CurveFamily& family) {
  family.validate();
  std::vector<double> xs;
  for (size_t i = 0; i < family.curves.size(); ++i)
    for (size_t j = i + 1; j < family.curves.size(); ++j) {
      const Curve &a = family.curves[i], &b = family.curves[j];
      double lo = std::max(a.pts.front().x, b.pts.front().x);
      double hi = std::min(a.pts.back().x, b.pts.back().x);
      if (lo >= hi) {
        std::cerr << "warning: curves " << i << "," << j << " do not overlap\n";
        continue;
      }
      // union of sample abscissae restricted to the overlap
      std::vector<double> grid;
      for (const auto& p : a.pts)
        if (p.x >= lo && p.x <= hi) grid.push_back(p.x);
      for (const auto& p : b.pts)
        if (p.x >= lo && p.x <= hi) grid.push_back(p.x);
      grid.push_back(lo);
      grid.push_back(hi);
      std::sort(grid.begin(), grid.end());
      bool found = false;
      for (size_t g = 0; g + 1 < grid.size(); ++g) {
        double d0 = detail::lin_interp(a, grid[g]) - detail::lin_interp(b, grid[g]);
        double d1 = detail::lin_interp(a, grid[g + 1]) - detail::lin_interp(b, grid[g + 1]);
        if (d0 == 0.0) {
          xs.push_back(grid[g]);
          found = true;
          break;
        }
        if (d0 * d1 < 0.0) {
          xs.push_back(grid[g] + d0 / (d0 - d1) * (grid[g + 1] - grid[g]));
          found = true;
          break;
        }
      }
      if (!found) std::cerr << "warning: no crossing for curve pair " << i << "," << j << "\n";
    }
  if (xs.empty()) throw AllPairsFail("no curve pair intersects");
  CrossingResult r;
  r.pairs_used = (int)xs.size();
  for (double v : xs) r.eps_c += v;
  r.eps_c /= xs.size();
  for (double v : xs) r.spread += (v - r.eps_c) * (v - r.eps_c);
  r.spread = std::sqrt(r.spread / xs.size());
  return r;
}

enum class CollapseMode { temperature, size };

struct CollapseResult {
  double exponent = 0.0, eps_c = 0.0, objective = 0.0;
};

// Single-parameter collapse: rescale X = (x - eps_c)(T/T0)^{-kappa} or
// X = eps_c + (x - eps_c)(L/L0)^{1/nu}; objective is the variance across
// curves of values interpolated onto a common 101-point X-grid, summed.
inline CollapseResult collapse_fit(const CurveFamily& family, CollapseMode mode, double ref_label,
                                   double exp_lo, double exp_hi, bool weighted = false) {
  family.validate();
  if (family.curves.size() < 3) throw ConfigError("collapse needs >= 3 curves");
  double raw_lo = 1e300, raw_hi = -1e300;
  for (const auto& c : family.curves) {
    raw_lo = std::min(raw_lo, c.pts.front().x);
    raw_hi = std::max(raw_hi, c.pts.back().x);
  }
  double ov_lo = -1e300, ov_hi = 1e300;  // eps_c search box: pairwise overlap
  for (const auto& c : family.curves) {
    ov_lo = std::max(ov_lo, c.pts.front().x);
    ov_hi = std::min(ov_hi, c.pts.back().x);
  }
  if (ov_lo >= ov_hi) throw DegenerateOverlap("curves do not overlap in the raw variable");

  auto objective = [&](double expo, double eps_c, bool* degenerate) -> double {
    auto rescale = [&](const Curve& c, double x) {
      double f = mode == CollapseMode::temperature ? std::pow(c.label / ref_label, -expo)
                                                   : std::pow(c.label / ref_label, 1.0 / expo);
      return mode == CollapseMode::temperature ? (x - eps_c) * f : eps_c + (x - eps_c) * f;
    };
    double lo = -1e300, hi = 1e300;
    for (const auto& c : family.curves) {
      double a = rescale(c, c.pts.front().x), b = rescale(c, c.pts.back().x);
      lo = std::max(lo, std::min(a, b));
      hi = std::min(hi, std::max(a, b));
    }
    if (degenerate) *degenerate = (hi - lo) < 0.2 * (raw_hi - raw_lo);
    if (hi <= lo) return 1e300;
    double total = 0.0;
    const int G = 101;
    std::vector<detail::Pchip> interp;
    std::vector<double> winv;
    for (const auto& c : family.curves) {
      std::vector<double> xs, ys;
      double esum = 0.0;
      for (const auto& p : c.pts) {
        xs.push_back(rescale(c, p.x));
        ys.push_back(p.y);
        esum += p.err;
      }
      if (xs.front() > xs.back()) {
        std::reverse(xs.begin(), xs.end());
        std::reverse(ys.begin(), ys.end());
      }
      interp.emplace_back(xs, ys);
      double em = esum / (double)c.pts.size();
      winv.push_back(weighted && em > 0.0 ? 1.0 / (em * em) : 1.0);
    }
    for (int g = 0; g < G; ++g) {
      double X = lo + (hi - lo) * g / (G - 1);
      double mean = 0.0, wsum = 0.0;
      std::vector<double> vals;
      for (size_t c = 0; c < interp.size(); ++c) {
        vals.push_back(interp[c](X));
        mean += winv[c] * vals.back();
        wsum += winv[c];
      }
      mean /= wsum;
      for (size_t c = 0; c < vals.size(); ++c) total += winv[c] * (vals[c] - mean) * (vals[c] - mean) / wsum;
    }
    return total;
  };

  auto best_eps = [&](double expo) {
    return detail::golden_min([&](double e) { return objective(expo, e, nullptr); }, ov_lo, ov_hi);
  };
  double expo = detail::golden_min([&](double k) { return objective(k, best_eps(k), nullptr); },
                                   exp_lo, exp_hi, 40);
  CollapseResult r;
  r.exponent = expo;
  r.eps_c = best_eps(expo);
  bool degenerate = false;
  r.objective = objective(expo, r.eps_c, &degenerate);
  if (degenerate) throw DegenerateOverlap("rescaled common range below 20% of the raw range");
  return r;
}

inline double kappa_from_nu(double p, double nu) {
  if (nu <= 0.0) throw ConfigError("nu must be positive");
  return p / (2.0 * nu);
}

}  // namespace fvca
