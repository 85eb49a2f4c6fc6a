#include "sensornet/lp.hpp"

#include "sensornet/error.hpp"

#include <Eigen/LU>

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace sensornet {

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "?";
}

void LinearProgram::validate() const {
  const Eigen::Index n = objective.size();
  if (a_ub.rows() != b_ub.size() || (a_ub.rows() > 0 && a_ub.cols() != n)) {
    throw DomainError("LinearProgram: inequality block has inconsistent dimensions");
  }
  if (a_eq.rows() != b_eq.size() || (a_eq.rows() > 0 && a_eq.cols() != n)) {
    throw DomainError("LinearProgram: equality block has inconsistent dimensions");
  }
  if (upper.size() != 0 && upper.size() != n) throw DomainError("LinearProgram: upper bound size mismatch");
  if (!objective.allFinite() || !b_ub.allFinite() || !b_eq.allFinite()) {
    throw DomainError("LinearProgram: objective and right-hand sides must be finite");
  }
  for (Eigen::Index j = 0; j < upper.size(); ++j) {
    if (!(upper(j) >= 0.0) || !std::isfinite(upper(j))) {
      throw DomainError("LinearProgram: upper bounds must be finite and nonnegative");
    }
  }
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-11;
constexpr double kTieTol = 1e-12;

using SparseColumn = std::vector<std::pair<int, double>>;

enum class VarState : unsigned char { basic, lower, upper };

class RevisedSimplex {
 public:
  RevisedSimplex(const LinearProgram& lp, const LpOptions& opt) : lp_(lp), opt_(opt) {
    n_ = lp.num_vars();
    m1_ = static_cast<int>(lp.b_ub.size());
    m2_ = static_cast<int>(lp.b_eq.size());
    m_ = m1_ + m2_;
    rhs_.resize(m_);
    rhs_ << lp.b_ub, lp.b_eq;

    cols_.assign(n_, {});
    add_block(lp.a_ub, 0);
    add_block(lp.a_eq, m1_);
    lo_.assign(n_, 0.0);
    up_.resize(n_);
    for (int j = 0; j < n_; ++j) up_[j] = lp.upper_bound(j);

    for (int i = 0; i < m1_; ++i) add_var({{i, 1.0}}, 0.0, kInf);

    basis_.assign(m_, -1);
    std::vector<double> sign(m_, 1.0);
    for (int i = 0; i < m_; ++i) {
      const bool slack_fits = i < m1_ && rhs_(i) >= 0.0;
      if (slack_fits) {
        basis_[i] = n_ + i;
      } else {
        sign[i] = rhs_(i) >= 0.0 ? 1.0 : -1.0;
        basis_[i] = add_var({{i, sign[i]}}, 0.0, kInf);
        artificials_.push_back(basis_[i]);
      }
    }
    total_ = static_cast<int>(cols_.size());
    x_.assign(total_, 0.0);
    state_.assign(total_, VarState::lower);
    binv_ = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i) {
      state_[basis_[i]] = VarState::basic;
      x_[basis_[i]] = std::abs(rhs_(i));
      binv_(i, i) = sign[i];
    }
    max_iter_ = opt.max_iter > 0 ? opt.max_iter : 50L * (m_ + n_) + 1000;
  }

  LpResult run() {
    LpResult out;
    if (!artificials_.empty()) {
      Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(total_);
      for (int j : artificials_) phase1(j) = 1.0;
      iterate(phase1, out.iterations);
      double infeas = 0.0;
      for (int j : artificials_) infeas += x_[j];
      const double scale = std::max(1.0, rhs_.lpNorm<Eigen::Infinity>());
      if (infeas > 1e-7 * scale) {
        out.status = LpStatus::infeasible;
        out.used_bland = used_bland_;
        return out;
      }
      for (int j : artificials_) {
        up_[j] = 0.0;
        if (state_[j] != VarState::basic) {
          x_[j] = 0.0;
          state_[j] = VarState::lower;
        }
      }
      refactor();
    }

    Eigen::VectorXd cost = Eigen::VectorXd::Zero(total_);
    const double flip = lp_.sense == Sense::maximize ? -1.0 : 1.0;
    cost.head(n_) = flip * lp_.objective;
    if (!iterate(cost, out.iterations)) {
      out.status = LpStatus::unbounded;
      out.used_bland = used_bland_;
      return out;
    }

    out.status = LpStatus::optimal;
    out.used_bland = used_bland_;
    out.x.resize(n_);
    for (int j = 0; j < n_; ++j) {
      double v = x_[j];
      if (std::abs(v - lo_[j]) < kTieTol) v = lo_[j];
      if (std::abs(v - up_[j]) < kTieTol) v = up_[j];
      out.x(j) = v;
    }
    out.value = lp_.objective.dot(out.x);
    out.dual_bound = flip * dual_bound(cost);
    return out;
  }

 private:
  void add_block(const Eigen::SparseMatrix<double>& a, int row_offset) {
    for (int j = 0; j < a.outerSize(); ++j) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(a, j); it; ++it) {
        if (it.value() != 0.0) cols_[it.col()].emplace_back(static_cast<int>(it.row()) + row_offset, it.value());
      }
    }
  }

  int add_var(SparseColumn col, double lo, double up) {
    cols_.push_back(std::move(col));
    lo_.push_back(lo);
    up_.push_back(up);
    return static_cast<int>(cols_.size()) - 1;
  }

  double column_dot(int j, const Eigen::VectorXd& y) const {
    double s = 0.0;
    for (const auto& [i, v] : cols_[j]) s += v * y(i);
    return s;
  }

  void refactor() {
    if (m_ == 0) return;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m_, m_);
    for (int r = 0; r < m_; ++r) {
      for (const auto& [i, v] : cols_[basis_[r]]) b(i, r) = v;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
    if (!(lu.rcond() > 1e-14)) throw SolverError("solve_lp: basis matrix became singular");
    binv_ = lu.inverse();
    Eigen::VectorXd r = rhs_;
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == VarState::basic || x_[j] == 0.0) continue;
      for (const auto& [i, v] : cols_[j]) r(i) -= v * x_[j];
    }
    const Eigen::VectorXd xb = binv_ * r;
    for (int i = 0; i < m_; ++i) x_[basis_[i]] = xb(i);
  }

  // Returns false when the objective is unbounded along an entering direction.
  bool iterate(const Eigen::VectorXd& cost, long& iterations) {
    bool bland = false;
    int degenerate = 0;
    int since_refactor = 0;
    long phase_iter = 0;
    Eigen::VectorXd cb(m_), y(m_), alpha(m_);

    for (;;) {
      if (phase_iter >= max_iter_) {
        if (bland) {
          throw SolverError("solve_lp: iteration limit reached under Bland's rule (" + std::to_string(max_iter_) +
                            " pivots)");
        }
        bland = true;
        used_bland_ = true;
        phase_iter = 0;
      }

      for (int i = 0; i < m_; ++i) cb(i) = cost(basis_[i]);
      y.noalias() = binv_.transpose() * cb;

      int enter = -1;
      double best = 0.0;
      for (int j = 0; j < total_; ++j) {
        if (state_[j] == VarState::basic || up_[j] <= lo_[j]) continue;
        const double d = cost(j) - column_dot(j, y);
        const bool eligible =
            (state_[j] == VarState::lower && d < -opt_.tol) || (state_[j] == VarState::upper && d > opt_.tol);
        if (!eligible) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          enter = j;
        }
      }
      if (enter < 0) return true;

      alpha.setZero();
      for (const auto& [i, v] : cols_[enter]) alpha += v * binv_.col(i);
      const double dir = state_[enter] == VarState::lower ? 1.0 : -1.0;

      int leave = -1;
      double theta = kInf;
      VarState leave_to = VarState::lower;
      for (int i = 0; i < m_; ++i) {
        if (std::abs(alpha(i)) <= kPivotTol) continue;
        const int b = basis_[i];
        const double delta = -dir * alpha(i);
        double limit;
        VarState to;
        if (delta < 0.0) {
          limit = (x_[b] - lo_[b]) / -delta;
          to = VarState::lower;
        } else {
          if (up_[b] == kInf) continue;
          limit = (up_[b] - x_[b]) / delta;
          to = VarState::upper;
        }
        limit = std::max(0.0, limit);
        bool take = false;
        if (leave < 0 || limit < theta - kTieTol) {
          take = true;
        } else if (limit <= theta + kTieTol) {
          if (bland) {
            take = b < basis_[leave];
          } else {
            const double a_new = std::abs(alpha(i)), a_old = std::abs(alpha(leave));
            take = a_new > a_old || (a_new == a_old && b < basis_[leave]);
          }
        }
        if (take) {
          leave = i;
          theta = limit;
          leave_to = to;
        }
      }

      const double span = up_[enter] - lo_[enter];
      if (leave < 0 && span == kInf) return false;

      ++iterations;
      ++phase_iter;
      if (span <= theta) {
        // Bound flip: the entering variable crosses its box before any basic variable blocks.
        x_[enter] += dir * span;
        for (int i = 0; i < m_; ++i) x_[basis_[i]] -= dir * span * alpha(i);
        state_[enter] = state_[enter] == VarState::lower ? VarState::upper : VarState::lower;
        x_[enter] = state_[enter] == VarState::lower ? lo_[enter] : up_[enter];
        degenerate = 0;
        continue;
      }

      x_[enter] += dir * theta;
      for (int i = 0; i < m_; ++i) x_[basis_[i]] -= dir * theta * alpha(i);
      const int out = basis_[leave];
      state_[out] = leave_to;
      x_[out] = leave_to == VarState::lower ? lo_[out] : up_[out];
      basis_[leave] = enter;
      state_[enter] = VarState::basic;

      const double piv = alpha(leave);
      binv_.row(leave) /= piv;
      for (int i = 0; i < m_; ++i) {
        if (i != leave && alpha(i) != 0.0) binv_.row(i) -= alpha(i) * binv_.row(leave);
      }

      if (theta <= opt_.tol) {
        if (++degenerate >= opt_.degenerate_streak && !bland) {
          bland = true;
          used_bland_ = true;
        }
      } else {
        degenerate = 0;
      }
      if (++since_refactor >= opt_.refactor_every) {
        refactor();
        since_refactor = 0;
      }
    }
  }

  // c'x >= y'rhs + sum_j min(0, d_j) * (largest value x_j can take), valid for every feasible x.
  double dual_bound(const Eigen::VectorXd& cost) const {
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb(i) = cost(basis_[i]);
    const Eigen::VectorXd y = binv_.transpose() * cb;
    double bound = y.dot(rhs_);
    for (int j = 0; j < n_; ++j) {
      const double d = cost(j) - column_dot(j, y);
      if (d < 0.0) bound += d * up_[j];
    }
    // Largest slack of row i: b_i minus the smallest value the row can take over the box.
    std::vector<double> slack_max(rhs_.data(), rhs_.data() + m1_);
    for (int j = 0; j < n_; ++j) {
      for (const auto& [r, v] : cols_[j]) {
        if (r < m1_ && v < 0.0) slack_max[r] -= v * up_[j];
      }
    }
    for (int i = 0; i < m1_; ++i) {
      if (-y(i) < 0.0) bound += -y(i) * slack_max[i];
    }
    return bound;
  }

  const LinearProgram& lp_;
  const LpOptions& opt_;
  int n_ = 0, m1_ = 0, m2_ = 0, m_ = 0, total_ = 0;
  Eigen::VectorXd rhs_;
  std::vector<SparseColumn> cols_;
  std::vector<double> lo_, up_, x_;
  std::vector<VarState> state_;
  std::vector<int> basis_;
  std::vector<int> artificials_;
  Eigen::MatrixXd binv_;
  long max_iter_ = 0;
  bool used_bland_ = false;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, const LpOptions& options) {
  lp.validate();
  RevisedSimplex simplex(lp, options);
  return simplex.run();
}

void write_lp(std::ostream& out, const LinearProgram& lp) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << (lp.sense == Sense::minimize ? "minimize" : "maximize") << " " << lp.num_vars() << " vars\n";
  out << "c:";
  for (int j = 0; j < lp.num_vars(); ++j) out << " " << num(lp.objective(j));
  out << "\nu:";
  for (int j = 0; j < lp.num_vars(); ++j) out << " " << num(lp.upper_bound(j));
  out << "\n";
  auto rows = [&](const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b, const char* tag, const char* op) {
    const Eigen::SparseMatrix<double, Eigen::RowMajor> r = a;
    for (int i = 0; i < r.outerSize(); ++i) {
      out << tag << i << ":";
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(r, i); it; ++it) {
        out << " " << num(it.value()) << "*x" << it.col();
      }
      out << " " << op << " " << num(b(i)) << "\n";
    }
  };
  rows(lp.a_ub, lp.b_ub, "ub", "<=");
  rows(lp.a_eq, lp.b_eq, "eq", "=");
}

// ---- selection polytope ------------------------------------------------------

SelectionPolytope::SelectionPolytope(CellCosts costs, SelectionBudget budget, Restriction restriction)
    : costs_(std::move(costs)), budget_(budget), restriction_(restriction) {
  if (static_cast<int>(costs_.type_cost.size()) != costs_.shape.types ||
      static_cast<int>(costs_.resource.size()) != costs_.shape.bandwidths) {
    throw DomainError("SelectionPolytope: cell costs do not match the shape");
  }
}

void SelectionPolytope::add_constraint(const Eigen::VectorXd& coeffs, double rhs) {
  if (coeffs.size() != costs_.shape.size()) throw DomainError("SelectionPolytope: constraint size mismatch");
  extra_rows_.push_back(coeffs);
  extra_rhs_.push_back(rhs);
}

LinearProgram SelectionPolytope::program(const Eigen::VectorXd& objective, Sense sense) const {
  const SelectionShape& sh = costs_.shape;
  const int n = sh.size();
  const int per = sh.cells_per_location();
  if (objective.size() != n) throw DomainError("SelectionPolytope: objective size mismatch");

  LinearProgram lp;
  lp.objective = objective;
  lp.sense = sense;

  std::vector<Eigen::Triplet<double>> eq;
  eq.reserve(n);
  for (int l = 0; l < sh.locations; ++l) {
    for (int c = 0; c < per; ++c) eq.emplace_back(l, l * per + c, 1.0);
  }
  lp.a_eq.resize(sh.locations, n);
  lp.a_eq.setFromTriplets(eq.begin(), eq.end());
  lp.b_eq = Eigen::VectorXd::Ones(sh.locations);

  std::vector<Eigen::Triplet<double>> ub;
  std::vector<double> rhs;
  auto add_row = [&](auto coeff, double cap) {
    const int row = static_cast<int>(rhs.size());
    const double scale = cap > 0.0 ? 1.0 / cap : 1.0;
    for (int l = 0; l < sh.locations; ++l) {
      for (int c = 0; c < per; ++c) {
        const double v = coeff(c);
        if (v != 0.0) ub.emplace_back(row, l * per + c, v * scale);
      }
    }
    rhs.push_back(cap * scale);
  };
  if (std::isfinite(budget_.cost_cap)) add_row([&](int c) { return costs_.cost(c); }, budget_.cost_cap);
  if (std::isfinite(budget_.resource_cap)) add_row([&](int c) { return costs_.use(c); }, budget_.resource_cap);
  for (std::size_t r = 0; r < extra_rows_.size(); ++r) {
    const int row = static_cast<int>(rhs.size());
    for (int j = 0; j < n; ++j) {
      if (extra_rows_[r](j) != 0.0) ub.emplace_back(row, j, extra_rows_[r](j));
    }
    rhs.push_back(extra_rhs_[r]);
  }
  lp.a_ub.resize(static_cast<int>(rhs.size()), n);
  lp.a_ub.setFromTriplets(ub.begin(), ub.end());
  lp.b_ub = Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));

  lp.upper = Eigen::VectorXd::Ones(n);
  if (restriction_.active()) {
    for (int l = 0; l < sh.locations; ++l) {
      for (int c = 0; c < per; ++c) {
        if (!restriction_.allows(sh.cell_type(c), sh.cell_bandwidth(c))) lp.upper(l * per + c) = 0.0;
      }
    }
  }
  return lp;
}

LpResult SelectionPolytope::solve(const Eigen::VectorXd& objective, Sense sense, const LpOptions& options) const {
  return solve_lp(program(objective, sense), options);
}

Eigen::VectorXd SelectionPolytope::lmo(const Eigen::VectorXd& objective, const LpOptions& options) const {
  LpResult r = solve(objective, Sense::minimize, options);
  if (r.status != LpStatus::optimal) {
    throw InfeasibleError(std::string("selection polytope: ") + to_string(r.status) + " under the given budgets");
  }
  return std::move(r.x);
}

Selection lmo_selection_polytope(const Selection& objective, const CellCosts& costs, const SelectionBudget& budget,
                                 const Restriction& restriction) {
  if (!(objective.shape() == costs.shape)) throw DomainError("lmo_selection_polytope: shape mismatch");
  const SelectionPolytope poly(costs, budget, restriction);
  return Selection(costs.shape, poly.lmo(objective.weights()));
}

}  // namespace sensornet
