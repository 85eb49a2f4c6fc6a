#include "sensornet/frank_wolfe.hpp"

#include "sensornet/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sensornet {

namespace {

struct Atom {
  Eigen::VectorXd point;
  double weight;
};

// argmin of the convex function t -> f(x + t d) over [0, t_max].
double line_search(const GradientFn& grad, const Eigen::VectorXd& x, const Eigen::VectorXd& d, double t_max,
                   int steps) {
  if (grad(x + t_max * d).dot(d) <= 0.0) return t_max;
  double lo = 0.0, hi = t_max;
  for (int i = 0; i < steps && hi - lo > 1e-15 * t_max; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (grad(x + mid * d).dot(d) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

FwResult frank_wolfe(const ValueFn& f, const GradientFn& grad, const LinearOracle& lmo, Eigen::VectorXd x0,
                     const FwOptions& opt) {
  if (opt.tol < 0 || opt.max_iter < 0) throw DomainError("frank_wolfe: tol and max_iter must be nonnegative");
  FwResult out;
  out.x = std::move(x0);
  out.value = f(out.x);

  // The starting point counts as an atom so away steps can remove its mass.
  std::vector<Atom> active{{out.x, 1.0}};

  for (int t = 0;; ++t) {
    const Eigen::VectorXd g = grad(out.x);
    const Eigen::VectorXd v = lmo(g);
    out.gap = std::max(0.0, g.dot(out.x - v));
    if (out.gap <= opt.tol) {
      out.converged = true;
      break;
    }
    if (t >= opt.max_iter) break;

    Eigen::VectorXd d = v - out.x;
    double t_max = 1.0;
    int away = -1;
    if (opt.away_steps && active.size() > 1) {
      std::size_t worst = 0;
      double worst_dot = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < active.size(); ++i) {
        const double s = g.dot(active[i].point);
        if (s > worst_dot) {
          worst_dot = s;
          worst = i;
        }
      }
      const double away_gap = worst_dot - g.dot(out.x);
      if (away_gap > out.gap && active[worst].weight < 1.0) {
        away = static_cast<int>(worst);
        d = out.x - active[worst].point;
        t_max = active[worst].weight / (1.0 - active[worst].weight);
      }
    }

    double step = line_search(grad, out.x, d, t_max, opt.line_search_steps);
    Eigen::VectorXd next = out.x + step * d;
    double next_value = f(next);
    if (away < 0) {
      const double open_loop = 2.0 / (t + 2.0);
      const Eigen::VectorXd alt = out.x + open_loop * d;
      const double alt_value = f(alt);
      if (alt_value < next_value) {
        step = open_loop;
        next = alt;
        next_value = alt_value;
      }
    }
    if (!(next_value <= out.value)) {
      // Round-off made the step uphill; the current iterate is as good as this direction gets.
      break;
    }

    if (away < 0) {
      if (step >= 1.0) {
        active.assign(1, {v, 1.0});
      } else {
        for (auto& a : active) a.weight *= (1.0 - step);
        auto it = std::find_if(active.begin(), active.end(), [&](const Atom& a) { return a.point == v; });
        if (it == active.end()) {
          active.push_back({v, step});
        } else {
          it->weight += step;
        }
      }
    } else {
      for (auto& a : active) a.weight *= (1.0 + step);
      active[away].weight -= step;
      if (step >= t_max || active[away].weight <= 1e-15) active.erase(active.begin() + away);
    }

    out.x = std::move(next);
    out.value = next_value;
    out.values.push_back(next_value);
    out.iterations = t + 1;
  }
  return out;
}

}  // namespace sensornet
