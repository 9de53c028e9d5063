#include "pvprof/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "pvprof/error.hpp"

namespace pvprof {

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b, const std::vector<char>& free) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j)
    if (free[j]) s += a[j] * b[j];
  return s;
}

struct CurvaturePair {
  Vec s, y;
};

// Two-loop recursion on the free coordinates; returns -H g.
Vec lbfgs_direction(const Vec& g, const std::deque<CurvaturePair>& pairs, const std::vector<char>& free) {
  const std::size_t n = g.size();
  Vec q(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) q[j] = free[j] ? g[j] : 0.0;
  std::vector<double> alpha(pairs.size(), 0.0), rho(pairs.size(), 0.0);
  for (std::size_t k = pairs.size(); k-- > 0;) {
    const double sy = dot(pairs[k].s, pairs[k].y, free);
    rho[k] = sy > 0.0 ? 1.0 / sy : 0.0;
    alpha[k] = rho[k] * dot(pairs[k].s, q, free);
    for (std::size_t j = 0; j < n; ++j)
      if (free[j]) q[j] -= alpha[k] * pairs[k].y[j];
  }
  double gamma = 1.0;
  if (!pairs.empty()) {
    const double yy = dot(pairs.back().y, pairs.back().y, free);
    const double sy = dot(pairs.back().s, pairs.back().y, free);
    if (yy > 0.0 && sy > 0.0) gamma = sy / yy;
  }
  for (double& v : q) v *= gamma;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const double beta = rho[k] * dot(pairs[k].y, q, free);
    for (std::size_t j = 0; j < n; ++j)
      if (free[j]) q[j] += pairs[k].s[j] * (alpha[k] - beta);
  }
  for (double& v : q) v = -v;
  return q;
}

Vec project(Vec x, const Vec& lo, const Vec& hi) {
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = std::clamp(x[j], lo[j], hi[j]);
  return x;
}

}  // namespace

std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                const std::vector<double>& x, const std::vector<double>& lo,
                                const std::vector<double>& hi, double step, int* evaluations) {
  Vec g(x.size(), 0.0);
  Vec xp = x, xm = x;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double up = std::min(step, hi[j] - x[j]);
    const double down = std::min(step, x[j] - lo[j]);
    xp[j] = x[j] + up;
    xm[j] = x[j] - down;
    if (up + down > 0.0) g[j] = (f(xp) - f(xm)) / (up + down);
    if (evaluations) *evaluations += 2;
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return g;
}

BoundedMinimizeResult minimize_bounded(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x0, const std::vector<double>& lo,
                                       const std::vector<double>& hi, const BoundedMinimizeOptions& opts) {
  const std::size_t n = x0.size();
  if (lo.size() != n || hi.size() != n) throw ConfigError("bound vectors do not match the variable count");
  BoundedMinimizeResult result;
  Vec x = project(std::move(x0), lo, hi);
  double fx = f(x);
  ++result.evaluations;
  if (!std::isfinite(fx)) throw NumericError("objective is not finite at the initial point");
  result.x = x;
  result.f = fx;

  std::deque<CurvaturePair> pairs;
  Vec g = fd_gradient(f, x, lo, hi, opts.fd_step, &result.evaluations);
  const double tiny = 1e-12;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    result.iterations = iter + 1;
    std::vector<char> free(n, 1);
    for (std::size_t j = 0; j < n; ++j) {
      const double span = hi[j] - lo[j];
      if ((x[j] <= lo[j] + tiny * span && g[j] > 0.0) || (x[j] >= hi[j] - tiny * span && g[j] < 0.0)) free[j] = 0;
    }

    bool accepted = false;
    Vec x_new;
    double f_new = fx;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      Vec d = lbfgs_direction(g, pairs, free);
      double slope = dot(g, d, free);
      if (!(slope < 0.0)) {
        pairs.clear();
        d = lbfgs_direction(g, pairs, free);
        slope = dot(g, d, free);
      }
      if (!(slope < 0.0)) break;
      double alpha = 1.0;
      if (pairs.empty()) {
        double dmax = 0.0;
        for (double v : d) dmax = std::max(dmax, std::abs(v));
        if (dmax > 0.0) alpha = std::min(1.0, 0.1 / dmax);
      }
      for (int ls = 0; ls < 50; ++ls, alpha *= 0.5) {
        Vec trial(n);
        for (std::size_t j = 0; j < n; ++j) trial[j] = x[j] + alpha * d[j];
        trial = project(std::move(trial), lo, hi);
        double decrease = 0.0;
        for (std::size_t j = 0; j < n; ++j) decrease += g[j] * (trial[j] - x[j]);
        const double ft = f(trial);
        ++result.evaluations;
        if (std::isfinite(ft) && ft <= fx + 1e-4 * decrease && ft < fx) {
          x_new = std::move(trial);
          f_new = ft;
          accepted = true;
          break;
        }
      }
      if (!accepted) pairs.clear();
    }

    if (!accepted) {
      // No descent available at finite-difference resolution.
      result.converged = true;
      break;
    }

    const double improvement = fx - f_new;
    Vec g_new = fd_gradient(f, x_new, lo, hi, opts.fd_step, &result.evaluations);
    CurvaturePair pair{Vec(n), Vec(n)};
    for (std::size_t j = 0; j < n; ++j) {
      pair.s[j] = x_new[j] - x[j];
      pair.y[j] = g_new[j] - g[j];
    }
    double sy = 0.0, yy = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      sy += pair.s[j] * pair.y[j];
      yy += pair.y[j] * pair.y[j];
    }
    if (sy > 1e-14 * yy) {
      pairs.push_back(std::move(pair));
      if (static_cast<int>(pairs.size()) > opts.history) pairs.pop_front();
    }
    x = std::move(x_new);
    fx = f_new;
    g = std::move(g_new);
    if (fx < result.f) {
      result.f = fx;
      result.x = x;
    }
    if (fx == 0.0 || improvement <= opts.relative_tolerance * (fx + improvement)) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace pvprof
