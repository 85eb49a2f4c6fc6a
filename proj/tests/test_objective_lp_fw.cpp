#include "support.hpp"

#include "sensornet/budget.hpp"
#include "sensornet/error.hpp"
#include "sensornet/frank_wolfe.hpp"
#include "sensornet/link.hpp"
#include "sensornet/lp.hpp"
#include "sensornet/objective.hpp"

#include <doctest.h>

#include <Eigen/LU>

#include <limits>
#include <random>
#include <sstream>

using namespace sensornet;

namespace {

Eigen::VectorXd random_interior(std::mt19937_64& rng, const SelectionShape& sh) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Eigen::VectorXd s(sh.size());
  const int per = sh.cells_per_location();
  for (int l = 0; l < sh.locations; ++l) {
    double sum = 0;
    for (int c = 0; c < per; ++c) sum += (s(l * per + c) = u(rng));
    for (int c = 0; c < per; ++c) s(l * per + c) /= sum;
  }
  return s;
}

double trace_oracle(const Eigen::MatrixXd& prior, const Eigen::MatrixXd& h, const Eigen::VectorXd& w) {
  Eigen::MatrixXd info = prior.inverse();
  for (int l = 0; l < h.rows(); ++l) info += w(l) * h.row(l).transpose() * h.row(l);
  return info.fullPivLu().inverse().trace();
}

// Scalar Riccati recursion in long double, independent of the library.
double riccati_oracle(double gamma, double a, double q) {
  long double m = q / (1.0L - (long double)a * a);
  for (int i = 0; i < 200000; ++i) {
    const long double pred = (long double)a * a * m + q;
    const long double next = pred / (1.0L + gamma * pred);
    if (std::abs(next - m) <= 1e-30L) break;
    m = next;
  }
  return static_cast<double>(m);
}

struct DenseLp {
  Eigen::MatrixXd a_ub;
  Eigen::VectorXd b_ub;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::VectorXd upper;
  Eigen::VectorXd c;
};

LinearProgram to_program(const DenseLp& d, Sense sense) {
  LinearProgram lp;
  lp.objective = d.c;
  lp.a_ub = d.a_ub.sparseView();
  lp.b_ub = d.b_ub;
  lp.a_eq = d.a_eq.sparseView();
  lp.b_eq = d.b_eq;
  lp.upper = d.upper;
  lp.sense = sense;
  return lp;
}

// Enumerates every basic solution of the box-bounded LP and keeps the best feasible one.
std::optional<double> vertex_oracle(const DenseLp& d, Sense sense) {
  const int n = static_cast<int>(d.c.size());
  const int mu = static_cast<int>(d.a_ub.rows()), me = static_cast<int>(d.a_eq.rows());
  // candidate tight rows: ub rows, lower bounds, upper bounds
  const int pool = mu + 2 * n;
  std::vector<int> pick;
  std::optional<double> best;
  const int need = n - me;
  if (need < 0) return std::nullopt;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(pick.size()) == need) {
      Eigen::MatrixXd m(n, n);
      Eigen::VectorXd r(n);
      for (int i = 0; i < me; ++i) {
        m.row(i) = d.a_eq.row(i);
        r(i) = d.b_eq(i);
      }
      for (int i = 0; i < need; ++i) {
        const int t = pick[i];
        m.row(me + i).setZero();
        if (t < mu) {
          m.row(me + i) = d.a_ub.row(t);
          r(me + i) = d.b_ub(t);
        } else if (t < mu + n) {
          m(me + i, t - mu) = 1.0;
          r(me + i) = 0.0;
        } else {
          m(me + i, t - mu - n) = 1.0;
          r(me + i) = d.upper(t - mu - n);
        }
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
      if (lu.rank() < n) return;
      const Eigen::VectorXd x = lu.solve(r);
      const double eps = 1e-9;
      for (int j = 0; j < n; ++j) {
        if (x(j) < -eps || x(j) > d.upper(j) + eps) return;
      }
      if (mu > 0 && ((d.a_ub * x - d.b_ub).array() > eps).any()) return;
      if (me > 0 && ((d.a_eq * x - d.b_eq).array().abs() > eps).any()) return;
      const double v = d.c.dot(x);
      if (!best || (sense == Sense::minimize ? v < *best : v > *best)) best = v;
      return;
    }
    for (int t = start; t < pool; ++t) {
      pick.push_back(t);
      rec(t + 1);
      pick.pop_back();
    }
  };
  rec(0);
  return best;
}

}  // namespace

TEST_SUITE("objective") {
  TEST_CASE("trace objective against a direct inverse") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
      const Scenario s = testkit::random_scenario(rng, {6, 2, 2, 3, false});
      const LinkTable link = build_link_table(s);
      for (Scheme scheme : {Scheme::analog, Scheme::digital}) {
        const SelectionShape sh = problem_shape(link, scheme);
        const Eigen::VectorXd info = information_weights(link, scheme);
        const Eigen::VectorXd sv = random_interior(rng, sh);
        Eigen::VectorXd w = Eigen::VectorXd::Zero(sh.locations);
        for (int i = 0; i < sh.size(); ++i) w(i / sh.cells_per_location()) += sv(i) * info(i);
        const double expect = trace_oracle(link.prior, link.regressors, w);
        const Selection sel(sh, sv);
        CHECK(testkit::rel_diff(static_error_trace(link, sel, scheme), expect) < 1e-10);
      }
    }
  }

  TEST_CASE("empty selection leaves the prior") {
    const Scenario s = load_scenario_file(testkit::data_path("table1_static.json"));
    const LinkTable link = build_link_table(s);
    const Selection none = Selection::all_auxiliary(problem_shape(link, Scheme::digital));
    CHECK(static_error_trace(link, none, Scheme::digital) == doctest::Approx(5.0));
  }

  TEST_CASE("gradient against central differences") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 5; ++trial) {
      const Scenario s = testkit::random_scenario(rng, {5, 2, 2, 2, false});
      const LinkTable link = build_link_table(s);
      const StaticObjective f(link, Scheme::digital);
      const Eigen::VectorXd x = random_interior(rng, f.shape());
      const Eigen::VectorXd g = f.gradient(x);
      for (int i = 0; i < x.size(); ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
        Eigen::VectorXd xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        const double fd = (f.value(xp) - f.value(xm)) / (2 * h);
        CHECK(std::abs(g(i) - fd) <= 1e-5 * std::max(1e-8, std::abs(fd)) + 1e-12);
      }
    }
  }

  TEST_CASE("kalman closed form") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
      const double a = 0.99 * (2 * u(rng) - 1), q = 0.1 + 10 * u(rng), g = 100 * u(rng) * u(rng);
      const double m = kalman_mmse_from_gamma(g, a, q);
      CHECK(std::abs(a * a * g * m * m + (1 + q * g - a * a) * m - q) < 1e-12 * std::max(1.0, q));
      CHECK(testkit::rel_diff(m, riccati_oracle(g, a, q)) < 1e-10);
      CHECK(testkit::rel_diff(kalman_riccati_iterate(g, a, q), m) < 1e-9);
      CHECK(testkit::rel_diff(kalman_mmse_from_gamma(gamma_bound_from_error(m, a, q), a, q), m) < 1e-9);
    }
    CHECK(kalman_mmse_from_gamma(0.0, 0.5, 3.0) == doctest::Approx(3.0 / 0.75));
  }

  TEST_CASE("gamma coefficients") {
    CHECK(digital_gamma_coefficient(2.0, 1.0, 3.0) == doctest::Approx(1.0));
    CHECK(analog_gamma_coefficient(2.0, 1.0, 5.0, 2e-9, 1e-9) == doctest::Approx(4.0 / 3.5));
    const Scenario s = load_scenario_file(testkit::data_path("table1_dynamic.json"));
    const LinkTable link = build_link_table(s, SourceModel::dynamic_scalar);
    const GammaCoefficients gc = gamma_coefficients(link, Scheme::digital);
    for (int l = 0; l < 36; l += 5) {
      const double h = s.regressors(l, 0);
      CHECK(gc.values(gc.shape.index(l, 2, 1)) == doctest::Approx(h * h / link.at(l, 2, 1).sigma_et2));
      CHECK(gc.values(gc.shape.index(l, 0, 1)) == 0.0);
    }
    CHECK_THROWS_AS(gamma_coefficients(build_link_table(load_scenario_file(testkit::data_path("table1_static.json"))),
                                       Scheme::digital),
                    DomainError);
  }
}

TEST_SUITE("lp") {
  TEST_CASE("random box LPs against vertex enumeration") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> dim(1, 5), rows(0, 3), eqs(0, 2);
    int infeasible = 0, optimal = 0;
    for (int trial = 0; trial < 300; ++trial) {
      DenseLp d;
      const int n = dim(rng), mu = rows(rng), me = std::min(eqs(rng), n);
      d.c = Eigen::VectorXd::NullaryExpr(n, [&] { return u(rng); });
      d.upper = Eigen::VectorXd::NullaryExpr(n, [&] { return 0.5 + 2 * std::abs(u(rng)); });
      d.a_ub = Eigen::MatrixXd::NullaryExpr(mu, n, [&] { return u(rng); });
      d.b_ub = Eigen::VectorXd::NullaryExpr(mu, [&] { return 0.8 * u(rng); });
      d.a_eq = Eigen::MatrixXd::NullaryExpr(me, n, [&] { return u(rng); });
      d.b_eq = Eigen::VectorXd::NullaryExpr(me, [&] { return 0.5 * u(rng); });
      if (trial % 7 == 0) d.c.setZero();  // pure feasibility
      const Sense sense = trial % 2 ? Sense::maximize : Sense::minimize;
      const auto expect = vertex_oracle(d, sense);
      const LpResult r = solve_lp(to_program(d, sense));
      if (!expect) {
        ++infeasible;
        CHECK(r.status == LpStatus::infeasible);
        continue;
      }
      ++optimal;
      REQUIRE(r.status == LpStatus::optimal);
      CHECK(std::abs(r.value - *expect) <= 1e-8 * std::max(1.0, std::abs(*expect)));
      if (sense == Sense::minimize) {
        CHECK(r.dual_bound <= r.value + 1e-9);
      } else {
        CHECK(r.dual_bound >= r.value - 1e-9);
      }
      CHECK(std::abs(r.dual_bound - r.value) <= 1e-7 * std::max(1.0, std::abs(r.value)));
    }
    CHECK(infeasible > 10);
    CHECK(optimal > 100);
  }

  TEST_CASE("degenerate cycling example terminates") {
    // Beale's example; Dantzig pricing with a naive ratio test cycles.
    DenseLp d;
    d.c = Eigen::Vector4d(-0.75, 150, -0.02, 6);
    d.a_ub.resize(3, 4);
    d.a_ub << 0.25, -60, -0.04, 9, 0.5, -90, -0.02, 3, 0, 0, 1, 0;
    d.b_ub = Eigen::Vector3d(0, 0, 1);
    d.a_eq.resize(0, 4);
    d.b_eq.resize(0);
    d.upper = Eigen::VectorXd::Constant(4, 1e6);
    LpOptions o;
    o.degenerate_streak = 2;
    const LpResult r = solve_lp(to_program(d, Sense::minimize), o);
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.value == doctest::Approx(-0.05));
  }

  TEST_CASE("refactorization cadence does not change the answer") {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = 60, m = 25;
    DenseLp d;
    d.c = Eigen::VectorXd::NullaryExpr(n, [&] { return u(rng) - 0.5; });
    d.a_ub = Eigen::MatrixXd::NullaryExpr(m, n, [&] { return u(rng); });
    d.b_ub = Eigen::VectorXd::Constant(m, 8.0);
    d.a_eq = Eigen::MatrixXd::Ones(1, n);
    d.b_eq = Eigen::VectorXd::Constant(1, 12.0);
    d.upper = Eigen::VectorXd::Ones(n);
    LpOptions fresh;
    fresh.refactor_every = 1;
    const LpResult a = solve_lp(to_program(d, Sense::minimize));
    const LpResult b = solve_lp(to_program(d, Sense::minimize), fresh);
    REQUIRE(a.status == LpStatus::optimal);
    CHECK(a.value == doctest::Approx(b.value).epsilon(1e-10));
    // scipy HiGHS on the same data
    CHECK(a.value == doctest::Approx(-5.008684672916346).epsilon(1e-9));
    // with rhs 5 the equality row cannot be met
    d.b_ub.setConstant(5.0);
    CHECK(solve_lp(to_program(d, Sense::minimize)).status == LpStatus::infeasible);
  }

  TEST_CASE("invalid programs are rejected") {
    LinearProgram lp;
    lp.objective = Eigen::VectorXd::Ones(2);
    lp.a_ub.resize(1, 3);
    lp.b_ub = Eigen::VectorXd::Ones(1);
    lp.a_eq.resize(0, 2);
    CHECK_THROWS_AS(solve_lp(lp), DomainError);
  }

  TEST_CASE("selection polytope oracle") {
    const SelectionShape sh{3, 3, 2};
    CellCosts costs{sh, {0.0, 1.0, 2.0}, {1.0, 1.0}, ResourceMode::channels};
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Eigen::VectorXd c = Eigen::VectorXd::NullaryExpr(sh.size(), [&] { return u(rng); });

    // no binding budget: row-wise minimum
    const SelectionPolytope free_poly(costs, {});
    const Eigen::VectorXd v = free_poly.lmo(c);
    double expect = 0;
    for (int l = 0; l < 3; ++l) expect += c.segment(l * 6, 6).minCoeff();
    CHECK(c.dot(v) == doctest::Approx(expect));

    // a tight budget gives a point inside it, no worse than every Boolean selection
    const SelectionBudget budget{2.0, 2.0};
    const SelectionPolytope poly(costs, budget);
    const Eigen::VectorXd w = poly.lmo(c);
    Selection ws(sh, w);
    ws.validate(1e-9);
    CHECK(costs.total_cost(ws) <= 2.0 + 1e-9);
    CHECK(costs.total_use(ws) <= 2.0 + 1e-9);
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b)
        for (int d = 0; d < 6; ++d) {
          const int cells[3] = {a, b, d};
          const Selection s = Selection::from_assignment(sh, cells);
          if (costs.total_cost(s) <= 2.0 && costs.total_use(s) <= 2.0) best = std::min(best, c.dot(s.weights()));
        }
    CHECK(c.dot(w) <= best + 1e-12);

    // masked cells stay at zero
    Restriction only_b1;
    only_b1.bandwidth = 1;
    const Eigen::VectorXd r = SelectionPolytope(costs, {}, only_b1).lmo(c);
    for (int l = 0; l < 3; ++l)
      for (int k = 1; k < 3; ++k) CHECK(r(sh.index(l, k, 0)) == 0.0);

    std::ostringstream dump;
    write_lp(dump, poly.program(c, Sense::minimize));
    CHECK_FALSE(dump.str().empty());
  }

  TEST_CASE("empty feasible set throws") {
    const SelectionShape sh{2, 2, 1};
    CellCosts costs{sh, {0.0, 1.0}, {1.0}, ResourceMode::channels};
    SelectionPolytope poly(costs, {});
    Eigen::VectorXd row = Eigen::VectorXd::Zero(sh.size());
    row(sh.index(0, 0, 0)) = 1.0;
    row(sh.index(1, 0, 0)) = 1.0;
    poly.add_constraint(-row, -3.0);  // needs more than two empty slots
    CHECK_THROWS_AS(poly.lmo(Eigen::VectorXd::Ones(sh.size())), InfeasibleError);
  }
}

TEST_SUITE("frank_wolfe") {
  LinearOracle simplex_lmo() {
    return [](const Eigen::VectorXd& g) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(g.size());
      Eigen::Index i;
      g.minCoeff(&i);
      v(i) = 1.0;
      return v;
    };
  }

  TEST_CASE("one-dimensional quadratic") {
    // f = (x1 - 0.3)^2 over the segment x0 + x1 = 1
    const ValueFn f = [](const Eigen::VectorXd& x) { return (x(1) - 0.3) * (x(1) - 0.3); };
    const GradientFn g = [](const Eigen::VectorXd& x) { return Eigen::Vector2d(0.0, 2 * (x(1) - 0.3)); };
    const FwResult r = frank_wolfe(f, g, simplex_lmo(), Eigen::Vector2d(1.0, 0.0), {1e-12, 100, true, 60});
    CHECK(r.converged);
    CHECK(r.x(1) == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(r.gap <= 1e-12);
    for (std::size_t i = 1; i < r.values.size(); ++i) CHECK(r.values[i] <= r.values[i - 1] + 1e-15);
  }

  TEST_CASE("optimum on a face needs away steps") {
    const Eigen::Vector3d p(0.6, 0.4, 0.0);
    const ValueFn f = [p](const Eigen::VectorXd& x) { return (x - p).squaredNorm(); };
    const GradientFn g = [p](const Eigen::VectorXd& x) { return Eigen::VectorXd(2 * (x - p)); };
    const Eigen::Vector3d x0(1.0 / 3, 1.0 / 3, 1.0 / 3);
    const FwResult away = frank_wolfe(f, g, simplex_lmo(), x0, {1e-10, 2000, true, 60});
    CHECK(away.converged);
    CHECK((away.x - p).norm() < 1e-5);
    const FwResult plain = frank_wolfe(f, g, simplex_lmo(), x0, {1e-10, 2000, false, 60});
    CHECK(away.iterations < plain.iterations);
  }

  TEST_CASE("gap is a valid certificate") {
    const Eigen::Vector4d p(0.1, 0.2, 0.3, 0.4);
    const ValueFn f = [p](const Eigen::VectorXd& x) { return (x - p).squaredNorm() + x(0); };
    const GradientFn g = [p](const Eigen::VectorXd& x) {
      Eigen::VectorXd d = 2 * (x - p);
      d(0) += 1.0;
      return d;
    };
    const FwResult r = frank_wolfe(f, g, simplex_lmo(), Eigen::Vector4d(0, 0, 0, 1), {1e-8, 10, true, 60});
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 10);
    // true optimum: project p - e0/2 onto the simplex -> (0, 0.2+t, 0.3+t, 0.4+t) with t = 0.0333..
    const Eigen::Vector4d opt(0.0, 0.2 + 0.1 / 3, 0.3 + 0.1 / 3, 0.4 + 0.1 / 3);
    CHECK(r.value - r.gap <= f(opt) + 1e-12);
    CHECK(r.value >= f(opt) - 1e-12);
  }
}
