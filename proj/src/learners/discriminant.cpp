#include "fleetpdm/learners/discriminant.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fleetpdm/rng.hpp"
#include "param_io.hpp"

namespace fleetpdm::learners {

namespace {

constexpr double kRidgeFloorScale = 1e-8;
constexpr double kZeroVarianceTol = 1e-9;

struct DenseProblem {
  Eigen::MatrixXd x;        // n x m over kept columns
  std::vector<int> labels;  // 0/1
  std::vector<int> kept;    // kept column indices into the ledger
  long class_count[2] = {0, 0};
  std::vector<double> center;  // grand mean per kept column
  std::vector<double> scale;   // pooled within-class sd per kept column
};

// Drops columns whose pooled within-class standard deviation is numerically
// zero; a constant column makes the pooled covariance exactly singular and
// carries no discriminative signal.
DenseProblem densify(const features::FeatureMatrix& matrix) {
  const std::size_t n = matrix.rows.size();
  const std::size_t p = matrix.ledger.size();

  std::vector<double> mean_by_class[2];
  mean_by_class[0].assign(p, 0.0);
  mean_by_class[1].assign(p, 0.0);
  long count[2] = {0, 0};
  for (const auto& row : matrix.rows) {
    auto& m = mean_by_class[row.label];
    for (std::size_t j = 0; j < p; ++j) m[j] += row.values[j];
    ++count[row.label];
  }
  for (int c = 0; c < 2; ++c) {
    for (std::size_t j = 0; j < p; ++j) mean_by_class[c][j] /= static_cast<double>(count[c]);
  }

  std::vector<double> pooled_var(p, 0.0);
  std::vector<double> scale(p, 0.0);
  for (const auto& row : matrix.rows) {
    const auto& m = mean_by_class[row.label];
    for (std::size_t j = 0; j < p; ++j) {
      double d = row.values[j] - m[j];
      pooled_var[j] += d * d;
      scale[j] = std::max(scale[j], std::abs(row.values[j]));
    }
  }

  DenseProblem prob;
  prob.class_count[0] = count[0];
  prob.class_count[1] = count[1];
  for (std::size_t j = 0; j < p; ++j) {
    double sd = std::sqrt(pooled_var[j] / static_cast<double>(n));
    if (sd > kZeroVarianceTol * std::max(1.0, scale[j])) {
      prob.kept.push_back(static_cast<int>(j));
      double grand = (static_cast<double>(count[0]) * mean_by_class[0][j] +
                      static_cast<double>(count[1]) * mean_by_class[1][j]) /
                     static_cast<double>(n);
      prob.center.push_back(grand);
      prob.scale.push_back(sd);
    }
  }
  prob.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(prob.kept.size()));
  prob.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = matrix.rows[i];
    prob.labels[i] = row.label;
    for (std::size_t j = 0; j < prob.kept.size(); ++j) {
      prob.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          row.values[static_cast<std::size_t>(prob.kept[j])];
    }
  }
  return prob;
}

// Maximum-likelihood pooled within-class covariance (divide by n, the same
// normalization the mda EM step settles on, so the single-subclass mda and
// the zero-penalty pda reproduce lda's decisions).
Eigen::MatrixXd pooled_covariance(const DenseProblem& prob, Eigen::VectorXd mean[2]) {
  const Eigen::Index m = prob.x.cols();
  const Eigen::Index n = prob.x.rows();
  mean[0] = Eigen::VectorXd::Zero(m);
  mean[1] = Eigen::VectorXd::Zero(m);
  for (Eigen::Index i = 0; i < n; ++i) mean[prob.labels[i]] += prob.x.row(i).transpose();
  for (int c = 0; c < 2; ++c) mean[c] /= static_cast<double>(prob.class_count[c]);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd d = prob.x.row(i).transpose() - mean[prob.labels[i]];
    cov.selfadjointView<Eigen::Lower>().rankUpdate(d, 1.0);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(n);
  return cov;
}

double logsumexp2(double a, double b) {
  double m = std::max(a, b);
  if (!std::isfinite(m)) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

// ---------------------------------------------------------------------------
// lda / pda
// ---------------------------------------------------------------------------

// The discriminant is solved on features standardized by their pooled
// within-class sd, then folded back to the original scale. LDA decisions
// are invariant under the rescaling; for PDA it puts the ridge penalty on
// a common (correlation) scale so low-variance features are not wiped out.
std::unique_ptr<DiscriminantModel> fit_linear_discriminant(const LearnerSpec& spec,
                                                           const features::FeatureMatrix& matrix,
                                                           bool penalized) {
  DenseProblem prob = densify(matrix);
  const Eigen::Index m = prob.x.cols();
  const double n = static_cast<double>(prob.x.rows());

  for (Eigen::Index j = 0; j < m; ++j) {
    prob.x.col(j) = (prob.x.col(j).array() - prob.center[static_cast<std::size_t>(j)]) /
                    prob.scale[static_cast<std::size_t>(j)];
  }

  Eigen::VectorXd mean[2];
  Eigen::MatrixXd cov = pooled_covariance(prob, mean);

  double ridge = 0;
  if (penalized) {
    double floor = kRidgeFloorScale * cov.trace() / std::max<double>(1.0, static_cast<double>(m));
    ridge = std::max(spec.pda_lambda, floor);
    cov.diagonal().array() += ridge;
  }

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    if (!penalized) {
      throw SingularCovarianceError(
          "lda: pooled within-class covariance is singular; pda applies a ridge and will fit");
    }
    throw SingularCovarianceError("pda: covariance factorization failed despite the ridge");
  }

  auto model = std::unique_ptr<DiscriminantModel>(new DiscriminantModel());
  model->family_ = penalized ? LearnerFamily::pda : LearnerFamily::lda;
  model->kept_ = prob.kept;
  model->ridge_ = ridge;
  for (int c = 0; c < 2; ++c) {
    Eigen::VectorXd w = llt.solve(mean[c]);
    double prior = static_cast<double>(prob.class_count[c]) / n;
    double bias = -0.5 * mean[c].dot(w) + std::log(prior);
    model->class_means_[c].resize(static_cast<std::size_t>(m));
    model->weights_[c].resize(static_cast<std::size_t>(m));
    for (Eigen::Index j = 0; j < m; ++j) {
      auto ju = static_cast<std::size_t>(j);
      model->class_means_[c][ju] = prob.center[ju] + prob.scale[ju] * mean[c](j);
      model->weights_[c][ju] = w(j) / prob.scale[ju];
      bias -= w(j) * prob.center[ju] / prob.scale[ju];
    }
    model->bias_[c] = bias;
  }
  return model;
}

double DiscriminantModel::score_row(std::span<const double> row) const {
  double delta[2];
  for (int c = 0; c < 2; ++c) {
    double acc = bias_[c];
    for (std::size_t j = 0; j < kept_.size(); ++j) {
      acc += row[static_cast<std::size_t>(kept_[j])] * weights_[c][j];
    }
    delta[c] = acc;
  }
  // Posterior of class 1 under the shared-covariance Gaussian model.
  return 1.0 / (1.0 + std::exp(delta[0] - delta[1]));
}

void DiscriminantModel::save_params(std::ostream& out) const {
  out << "kept " << kept_.size();
  for (int i : kept_) out << ' ' << i;
  out << '\n';
  out << "ridge ";
  write_real(out, ridge_);
  out << '\n';
  for (int c = 0; c < 2; ++c) {
    out << "mean";
    write_real_list(out, class_means_[c]);
    out << "\nweight";
    write_real_list(out, weights_[c]);
    out << "\nbias ";
    write_real(out, bias_[c]);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// mda
// ---------------------------------------------------------------------------

namespace {

struct KmeansResult {
  std::vector<int> assignment;            // per row of the class
  std::vector<Eigen::VectorXd> centers;
};

// Seeded k-means++ with a fixed number of Lloyd passes. All ties break to
// the lowest index so the start is a pure function of (seed, data).
KmeansResult seeded_kmeans(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& rows, int k,
                           Rng& rng) {
  KmeansResult result;
  const std::size_t n = rows.size();
  result.assignment.assign(n, 0);

  std::vector<std::size_t> center_rows;
  center_rows.push_back(static_cast<std::size_t>(rng.uniform_below(n)));
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (center_rows.size() < static_cast<std::size_t>(k)) {
    const auto& latest = x.row(rows[center_rows.back()]);
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = (x.row(rows[i]) - latest).squaredNorm();
      d2[i] = std::min(d2[i], d);
      total += d2[i];
    }
    std::size_t chosen = 0;
    if (total > 0) {
      double u = rng.uniform01() * total;
      double cum = 0;
      for (std::size_t i = 0; i < n; ++i) {
        cum += d2[i];
        if (cum >= u) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = center_rows.size() % n;
    }
    center_rows.push_back(chosen);
  }
  result.centers.reserve(center_rows.size());
  for (std::size_t c : center_rows) result.centers.push_back(x.row(rows[c]).transpose());

  for (int pass = 0; pass < 10; ++pass) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < result.centers.size(); ++c) {
        double d = (x.row(rows[i]).transpose() - result.centers[c]).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (result.assignment[i] != best) {
        result.assignment[i] = best;
        changed = true;
      }
    }
    std::vector<long> size(result.centers.size(), 0);
    std::vector<Eigen::VectorXd> sum(result.centers.size(),
                                     Eigen::VectorXd::Zero(x.cols()));
    for (std::size_t i = 0; i < n; ++i) {
      ++size[result.assignment[i]];
      sum[result.assignment[i]] += x.row(rows[i]).transpose();
    }
    for (std::size_t c = 0; c < result.centers.size(); ++c) {
      if (size[c] == 0) {
        // Re-seed an empty cluster with the point farthest from its center.
        std::size_t far = 0;
        double far_d = -1;
        for (std::size_t i = 0; i < n; ++i) {
          double d =
              (x.row(rows[i]).transpose() - result.centers[result.assignment[i]]).squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        result.centers[c] = x.row(rows[far]).transpose();
        result.assignment[far] = static_cast<int>(c);
        changed = true;
      } else {
        result.centers[c] = sum[c] / static_cast<double>(size[c]);
      }
    }
    if (!changed) break;
  }
  return result;
}

}  // namespace

std::unique_ptr<MixtureDiscriminantModel> fit_mixture_discriminant(
    const LearnerSpec& spec, const features::FeatureMatrix& matrix) {
  DenseProblem prob = densify(matrix);
  const Eigen::Index m = prob.x.cols();
  const Eigen::Index n = prob.x.rows();

  auto model = std::unique_ptr<MixtureDiscriminantModel>(new MixtureDiscriminantModel());
  model->kept_ = prob.kept;

  std::vector<Eigen::Index> class_rows[2];
  for (Eigen::Index i = 0; i < n; ++i) class_rows[prob.labels[i]].push_back(i);
  for (int c = 0; c < 2; ++c) {
    model->class_log_prior_[c] =
        std::log(static_cast<double>(prob.class_count[c]) / static_cast<double>(n));
  }

  // Seeded k-means++ start, one mixture per class.
  int r_of[2];
  std::vector<Eigen::VectorXd> mu[2];
  std::vector<double> w[2];
  std::vector<int> assign[2];
  for (int c = 0; c < 2; ++c) {
    r_of[c] = std::min<long>(spec.mda_subclasses, prob.class_count[c]);
    Rng rng(substream_seed(spec.seed, "mda.kmeans", static_cast<std::uint64_t>(c)));
    KmeansResult km = seeded_kmeans(prob.x, class_rows[c], r_of[c], rng);
    mu[c] = std::move(km.centers);
    assign[c] = std::move(km.assignment);
    w[c].assign(r_of[c], 0.0);
    for (int a : assign[c]) w[c][a] += 1.0;
    for (double& v : w[c]) {
      v = std::max(v / static_cast<double>(class_rows[c].size()), 1e-6);
    }
    double total = 0;
    for (double v : w[c]) total += v;
    for (double& v : w[c]) v /= total;
  }

  // Shared covariance from the within-cluster scatter, plus a fixed ridge
  // that is part of the model (so EM stays exactly monotone).
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(m, m);
  for (int c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < class_rows[c].size(); ++i) {
      Eigen::VectorXd d = prob.x.row(class_rows[c][i]).transpose() - mu[c][assign[c][i]];
      cov.selfadjointView<Eigen::Lower>().rankUpdate(d, 1.0);
    }
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(n);
  const double ridge =
      std::max(kRidgeFloorScale * cov.trace() / std::max<double>(1.0, static_cast<double>(m)),
               std::numeric_limits<double>::min());
  cov.diagonal().array() += ridge;

  const double log2pi_term = -0.5 * static_cast<double>(m) * std::log(2.0 * std::numbers::pi);

  auto factorize = [&](const Eigen::MatrixXd& sigma) {
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) {
      throw SingularCovarianceError("mda: shared covariance factorization failed");
    }
    return llt;
  };

  // EM on the class-conditional mixture likelihood.
  double best_ll = -std::numeric_limits<double>::infinity();
  std::vector<Eigen::VectorXd> best_mu[2];
  std::vector<double> best_w[2];
  Eigen::MatrixXd best_cov = cov;
  double prev_ll = -std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;

  Eigen::MatrixXd resp[2];
  for (int c = 0; c < 2; ++c) {
    resp[c].resize(static_cast<Eigen::Index>(class_rows[c].size()), r_of[c]);
  }

  for (int iter = 0; iter < spec.mda_em_max_iter; ++iter) {
    ++iterations;
    Eigen::LLT<Eigen::MatrixXd> llt = factorize(cov);
    Eigen::MatrixXd chol = llt.matrixL();
    double log_det_half = 0;
    for (Eigen::Index j = 0; j < m; ++j) log_det_half += std::log(chol(j, j));

    double ll = 0;
    for (int c = 0; c < 2; ++c) {
      for (std::size_t i = 0; i < class_rows[c].size(); ++i) {
        double row_max = -std::numeric_limits<double>::infinity();
        for (int r = 0; r < r_of[c]; ++r) {
          Eigen::VectorXd d = prob.x.row(class_rows[c][i]).transpose() - mu[c][r];
          double quad = chol.triangularView<Eigen::Lower>().solve(d).squaredNorm();
          double logp = std::log(w[c][r]) + log2pi_term - log_det_half - 0.5 * quad;
          resp[c](static_cast<Eigen::Index>(i), r) = logp;
          row_max = std::max(row_max, logp);
        }
        double sum = 0;
        for (int r = 0; r < r_of[c]; ++r) {
          sum += std::exp(resp[c](static_cast<Eigen::Index>(i), r) - row_max);
        }
        double row_ll = row_max + std::log(sum);
        ll += row_ll;
        for (int r = 0; r < r_of[c]; ++r) {
          resp[c](static_cast<Eigen::Index>(i), r) =
              std::exp(resp[c](static_cast<Eigen::Index>(i), r) - row_ll);
        }
      }
    }
    model->em_.log_likelihood.push_back(ll);

    if (ll > best_ll) {
      best_ll = ll;
      for (int c = 0; c < 2; ++c) {
        best_mu[c] = mu[c];
        best_w[c] = w[c];
      }
      best_cov = cov;
    }
    if (iter > 0) {
      double improvement = ll - prev_ll;
      if (improvement >= 0 && improvement <= spec.mda_em_rel_tol * (std::abs(prev_ll) + 1.0)) {
        converged = true;
        break;
      }
    }
    prev_ll = ll;

    // M-step: subclass weights and means per class, covariance pooled over
    // everything, ridge folded back in as a constant part of the model.
    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(m, m);
    for (int c = 0; c < 2; ++c) {
      const double n_c = static_cast<double>(class_rows[c].size());
      for (int r = 0; r < r_of[c]; ++r) {
        double mass = resp[c].col(r).sum();
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(m);
        for (std::size_t i = 0; i < class_rows[c].size(); ++i) {
          sum += resp[c](static_cast<Eigen::Index>(i), r) * prob.x.row(class_rows[c][i]).transpose();
        }
        if (mass > 1e-12) {
          mu[c][r] = sum / mass;
        }
        w[c][r] = std::max(mass / n_c, 1e-12);
        for (std::size_t i = 0; i < class_rows[c].size(); ++i) {
          Eigen::VectorXd d = prob.x.row(class_rows[c][i]).transpose() - mu[c][r];
          scatter.selfadjointView<Eigen::Lower>().rankUpdate(
              d, resp[c](static_cast<Eigen::Index>(i), r));
        }
      }
      double total = 0;
      for (double v : w[c]) total += v;
      for (double& v : w[c]) v /= total;
    }
    scatter = scatter.selfadjointView<Eigen::Lower>();
    cov = scatter / static_cast<double>(n);
    cov.diagonal().array() += ridge;
  }

  model->em_.converged = converged;
  model->em_.iterations = iterations;

  for (int c = 0; c < 2; ++c) {
    model->mix_weights_[c] = best_w[c];
    model->mix_means_[c].resize(best_mu[c].size());
    for (std::size_t r = 0; r < best_mu[c].size(); ++r) {
      model->mix_means_[c][r].assign(best_mu[c][r].data(), best_mu[c][r].data() + m);
    }
  }
  model->covariance_.assign(best_cov.data(), best_cov.data() + m * m);
  model->finalize();
  return model;
}

void MixtureDiscriminantModel::finalize() {
  const auto m = static_cast<Eigen::Index>(kept_.size());
  Eigen::Map<const Eigen::MatrixXd> cov(covariance_.data(), m, m);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw SingularCovarianceError("mda: stored covariance is not positive definite");
  }
  Eigen::MatrixXd l = llt.matrixL();
  chol_.assign(l.data(), l.data() + m * m);
  log_det_half_ = 0;
  for (Eigen::Index j = 0; j < m; ++j) log_det_half_ += std::log(l(j, j));
}

double MixtureDiscriminantModel::log_gaussian(std::span<const double> x,
                                              const std::vector<double>& mean) const {
  const auto m = static_cast<Eigen::Index>(kept_.size());
  Eigen::VectorXd d(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    d(j) = x[static_cast<std::size_t>(kept_[static_cast<std::size_t>(j)])] -
           mean[static_cast<std::size_t>(j)];
  }
  Eigen::Map<const Eigen::MatrixXd> l(chol_.data(), m, m);
  double quad = l.triangularView<Eigen::Lower>().solve(d).squaredNorm();
  return -0.5 * static_cast<double>(m) * std::log(2.0 * std::numbers::pi) - log_det_half_ -
         0.5 * quad;
}

double MixtureDiscriminantModel::score_row(std::span<const double> row) const {
  double class_log[2];
  for (int c = 0; c < 2; ++c) {
    double acc = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < mix_weights_[c].size(); ++r) {
      double logp = std::log(mix_weights_[c][r]) + log_gaussian(row, mix_means_[c][r]);
      acc = logsumexp2(acc, logp);
    }
    class_log[c] = class_log_prior_[c] + acc;
  }
  return 1.0 / (1.0 + std::exp(class_log[0] - class_log[1]));
}

void MixtureDiscriminantModel::save_params(std::ostream& out) const {
  out << "kept " << kept_.size();
  for (int i : kept_) out << ' ' << i;
  out << '\n';
  out << "log_prior ";
  write_real(out, class_log_prior_[0]);
  out << ' ';
  write_real(out, class_log_prior_[1]);
  out << '\n';
  for (int c = 0; c < 2; ++c) {
    out << "subclasses " << mix_weights_[c].size() << '\n';
    out << "weights";
    write_real_list(out, mix_weights_[c]);
    out << '\n';
    for (const auto& mean : mix_means_[c]) {
      out << "mean";
      write_real_list(out, mean);
      out << '\n';
    }
  }
  out << "covariance";
  write_real_list(out, covariance_);
  out << '\n';
  out << "em " << em_.iterations << ' ' << (em_.converged ? 1 : 0) << ' '
      << em_.log_likelihood.size();
  write_real_list(out, em_.log_likelihood);
  out << '\n';
}

}  // namespace fleetpdm::learners
