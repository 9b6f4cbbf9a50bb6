#include "fleetpdm/learners/mars.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "param_io.hpp"

namespace fleetpdm::learners {

namespace {

// Above this many distinct values per feature, candidate knots are thinned
// to quantile-spaced observed values to keep the forward pass affordable.
constexpr std::size_t kMaxKnotsPerFeature = 37;
constexpr std::size_t kKnotThinningThreshold = 64;

Eigen::VectorXd hinge_column(const Eigen::VectorXd& x, double knot, int sign) {
  Eigen::VectorXd h(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double d = sign > 0 ? x(i) - knot : knot - x(i);
    h(i) = d > 0 ? d : 0.0;
  }
  return h;
}

struct LeastSquares {
  Eigen::VectorXd coef;
  double rss = 0;
};

// Exact refit on an explicit basis; RSS from the explicit residual.
LeastSquares solve_exact(const std::vector<Eigen::VectorXd>& basis, const Eigen::VectorXd& y) {
  const auto m = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd b(y.size(), m);
  for (Eigen::Index j = 0; j < m; ++j) b.col(j) = basis[static_cast<std::size_t>(j)];
  Eigen::MatrixXd gram = b.transpose() * b;
  double stabilizer = 1e-12 * gram.trace() / static_cast<double>(m);
  gram.diagonal().array() += stabilizer;
  LeastSquares out;
  out.coef = Eigen::LDLT<Eigen::MatrixXd>(gram).solve(b.transpose() * y);
  out.rss = (y - b * out.coef).squaredNorm();
  return out;
}

double gcv_of(double rss, double n, double terms, double penalty) {
  double c = terms + penalty * (terms - 1.0) / 2.0;
  if (c >= n) return std::numeric_limits<double>::infinity();
  double denom = 1.0 - c / n;
  return (rss / n) / (denom * denom);
}

}  // namespace

std::unique_ptr<MarsModel> fit_mars(const LearnerSpec& spec,
                                    const features::FeatureMatrix& matrix) {
  const auto n = static_cast<Eigen::Index>(matrix.rows.size());
  const std::size_t p = matrix.ledger.size();

  std::vector<Eigen::VectorXd> x(p, Eigen::VectorXd(n));
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = matrix.rows[static_cast<std::size_t>(i)].label;
    for (std::size_t j = 0; j < p; ++j) {
      x[j](i) = matrix.rows[static_cast<std::size_t>(i)].values[j];
    }
  }

  // Candidate knots: distinct observed values, quantile-thinned when dense.
  std::vector<std::vector<double>> knots(p);
  for (std::size_t j = 0; j < p; ++j) {
    std::vector<double> vals(x[j].data(), x[j].data() + n);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    if (vals.size() > kKnotThinningThreshold) {
      std::vector<double> picked;
      picked.reserve(kMaxKnotsPerFeature);
      for (std::size_t k = 0; k < kMaxKnotsPerFeature; ++k) {
        std::size_t idx = k * (vals.size() - 1) / (kMaxKnotsPerFeature - 1);
        picked.push_back(vals[idx]);
      }
      picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
      knots[j] = std::move(picked);
    } else {
      knots[j] = std::move(vals);
    }
  }

  std::vector<MarsModel::Term> terms{{-1, 0.0, 0}};
  std::vector<Eigen::VectorXd> basis{Eigen::VectorXd::Ones(n)};
  LeastSquares fit_state = solve_exact(basis, y);
  const double rss0 = fit_state.rss;
  const double nd = static_cast<double>(n);

  while (static_cast<int>(terms.size()) + 2 <= spec.mars_max_terms && fit_state.rss > 1e-12 * rss0) {
    const auto m = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd b(n, m);
    for (Eigen::Index j = 0; j < m; ++j) b.col(j) = basis[static_cast<std::size_t>(j)];
    Eigen::MatrixXd gram = b.transpose() * b;
    Eigen::VectorXd bty = b.transpose() * y;
    const double yty = y.squaredNorm();
    const double gram_scale = gram.trace() / static_cast<double>(m);

    double best_rss = std::numeric_limits<double>::infinity();
    std::size_t best_var = 0;
    double best_knot = 0;

    Eigen::MatrixXd aug(m + 2, m + 2);
    Eigen::VectorXd aug_rhs(m + 2);
    for (std::size_t j = 0; j < p; ++j) {
      for (double knot : knots[j]) {
        Eigen::VectorXd u = hinge_column(x[j], knot, +1);
        Eigen::VectorXd v = hinge_column(x[j], knot, -1);
        if (u.isZero(0) && v.isZero(0)) continue;

        aug.topLeftCorner(m, m) = gram;
        Eigen::VectorXd btu = b.transpose() * u;
        Eigen::VectorXd btv = b.transpose() * v;
        aug.block(0, m, m, 1) = btu;
        aug.block(m, 0, 1, m) = btu.transpose();
        aug.block(0, m + 1, m, 1) = btv;
        aug.block(m + 1, 0, 1, m) = btv.transpose();
        aug(m, m) = u.squaredNorm();
        aug(m, m + 1) = u.dot(v);
        aug(m + 1, m) = aug(m, m + 1);
        aug(m + 1, m + 1) = v.squaredNorm();
        aug_rhs.head(m) = bty;
        aug_rhs(m) = u.dot(y);
        aug_rhs(m + 1) = v.dot(y);

        Eigen::MatrixXd solve_gram = aug;
        solve_gram.diagonal().array() += 1e-10 * gram_scale;
        Eigen::VectorXd c = Eigen::LDLT<Eigen::MatrixXd>(solve_gram).solve(aug_rhs);
        double rss = yty - 2.0 * c.dot(aug_rhs) + c.dot(aug * c);
        if (rss < 0) rss = 0;
        if (rss < best_rss) {
          best_rss = rss;
          best_var = j;
          best_knot = knot;
        }
      }
    }

    if (!std::isfinite(best_rss) || fit_state.rss - best_rss <= 1e-10 * std::max(rss0, 1.0)) break;

    Eigen::VectorXd u = hinge_column(x[best_var], best_knot, +1);
    Eigen::VectorXd v = hinge_column(x[best_var], best_knot, -1);
    if (!u.isZero(0)) {
      basis.push_back(std::move(u));
      terms.push_back({static_cast<int>(best_var), best_knot, +1});
    }
    if (!v.isZero(0)) {
      basis.push_back(std::move(v));
      terms.push_back({static_cast<int>(best_var), best_knot, -1});
    }
    fit_state = solve_exact(basis, y);
  }

  const double forward_gcv =
      gcv_of(fit_state.rss, nd, static_cast<double>(terms.size()), spec.mars_gcv_penalty);

  // Backward pass: repeatedly delete the term whose removal minimizes GCV,
  // keeping the best subset seen (the full forward model included).
  std::vector<std::size_t> subset(terms.size());
  for (std::size_t i = 0; i < subset.size(); ++i) subset[i] = i;
  std::vector<std::size_t> best_subset = subset;
  double best_gcv = forward_gcv;

  auto refit_subset = [&](const std::vector<std::size_t>& idx) {
    std::vector<Eigen::VectorXd> cols;
    cols.reserve(idx.size());
    for (std::size_t i : idx) cols.push_back(basis[i]);
    return solve_exact(cols, y);
  };

  while (subset.size() > 1) {
    double round_best_gcv = std::numeric_limits<double>::infinity();
    std::size_t drop_pos = 0;
    for (std::size_t pos = 0; pos < subset.size(); ++pos) {
      if (subset[pos] == 0) continue;  // intercept stays
      std::vector<std::size_t> candidate;
      candidate.reserve(subset.size() - 1);
      for (std::size_t q = 0; q < subset.size(); ++q) {
        if (q != pos) candidate.push_back(subset[q]);
      }
      LeastSquares ls = refit_subset(candidate);
      double g = gcv_of(ls.rss, nd, static_cast<double>(candidate.size()), spec.mars_gcv_penalty);
      if (g < round_best_gcv) {
        round_best_gcv = g;
        drop_pos = pos;
      }
    }
    subset.erase(subset.begin() + static_cast<std::ptrdiff_t>(drop_pos));
    if (round_best_gcv < best_gcv) {
      best_gcv = round_best_gcv;
      best_subset = subset;
    }
  }

  LeastSquares final_fit = refit_subset(best_subset);
  auto model = std::unique_ptr<MarsModel>(new MarsModel());
  model->terms_.reserve(best_subset.size());
  for (std::size_t i : best_subset) model->terms_.push_back(terms[i]);
  model->coef_.assign(final_fit.coef.data(), final_fit.coef.data() + final_fit.coef.size());
  model->forward_gcv_ = forward_gcv;
  model->pruned_gcv_ = best_gcv;
  return model;
}

double MarsModel::score_row(std::span<const double> row) const {
  double acc = 0;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const Term& t = terms_[i];
    double h;
    if (t.sign == 0) {
      h = 1.0;
    } else {
      double d = t.sign > 0 ? row[static_cast<std::size_t>(t.variable)] - t.knot
                            : t.knot - row[static_cast<std::size_t>(t.variable)];
      h = d > 0 ? d : 0.0;
    }
    acc += coef_[i] * h;
  }
  return std::clamp(acc, 0.0, 1.0);
}

void MarsModel::save_params(std::ostream& out) const {
  out << "terms " << terms_.size() << '\n';
  for (const Term& t : terms_) {
    out << t.variable << ' ';
    write_real(out, t.knot);
    out << ' ' << t.sign << '\n';
  }
  out << "coef";
  write_real_list(out, coef_);
  out << '\n';
  out << "gcv ";
  write_real(out, forward_gcv_);
  out << ' ';
  write_real(out, pruned_gcv_);
  out << '\n';
}

}  // namespace fleetpdm::learners
