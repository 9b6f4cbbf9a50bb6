#include "fleetpdm/learners/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fleetpdm/learners/discriminant.hpp"
#include "fleetpdm/learners/gbm.hpp"
#include "fleetpdm/learners/mars.hpp"
#include "fleetpdm/learners/random_forest.hpp"

namespace fleetpdm::learners {

namespace {

constexpr const char* kFamilyNames[] = {"lda", "pda", "mda", "mars", "gbm", "rf"};

void write_double(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

}  // namespace

const char* family_name(LearnerFamily family) { return kFamilyNames[static_cast<int>(family)]; }

LearnerFamily family_from_name(std::string_view name) {
  for (int i = 0; i < 6; ++i) {
    if (name == kFamilyNames[i]) return static_cast<LearnerFamily>(i);
  }
  throw std::invalid_argument("unknown learner family: \"" + std::string(name) + "\"");
}

void LearnerSpec::validate() const {
  if (pda_lambda < 0) throw std::invalid_argument("pda lambda must be >= 0");
  if (mda_subclasses < 1) throw std::invalid_argument("mda subclasses must be >= 1");
  if (mda_em_max_iter < 1) throw std::invalid_argument("mda em_max_iter must be >= 1");
  if (!(mda_em_rel_tol > 0)) throw std::invalid_argument("mda em_rel_tol must be > 0");
  if (mars_max_terms < 1) throw std::invalid_argument("mars max_terms must be >= 1");
  if (mars_gcv_penalty < 0) throw std::invalid_argument("mars gcv_penalty must be >= 0");
  if (gbm_n_trees < 1) throw std::invalid_argument("gbm n_trees must be >= 1");
  if (gbm_max_depth < 1) throw std::invalid_argument("gbm max_depth must be >= 1");
  if (!(gbm_shrinkage > 0) || gbm_shrinkage > 1) {
    throw std::invalid_argument("gbm shrinkage must be in (0, 1]");
  }
  if (rf_n_trees < 1) throw std::invalid_argument("rf n_trees must be >= 1");
  if (rf_mtry < 0) throw std::invalid_argument("rf mtry must be >= 0");
  if (rf_min_leaf < 1) throw std::invalid_argument("rf min_leaf must be >= 1");
}

Prediction TrainedModel::predict(std::span<const double> row) const {
  if (row.size() != ledger_.size()) {
    throw std::invalid_argument("predict: row has " + std::to_string(row.size()) +
                                " features, model ledger has " + std::to_string(ledger_.size()));
  }
  double s = score_row(row);
  if (s < 0) s = 0;
  if (s > 1) s = 1;
  return Prediction{s >= 0.5 ? 1 : 0, s};
}

std::unique_ptr<TrainedModel> fit(const LearnerSpec& spec, const features::FeatureMatrix& matrix) {
  spec.validate();
  if (matrix.rows.empty()) throw std::invalid_argument("fit: empty training matrix");
  bool seen[2] = {false, false};
  for (const auto& row : matrix.rows) {
    if (row.values.size() != matrix.ledger.size()) {
      throw std::invalid_argument("fit: row width does not match the ledger");
    }
    for (double v : row.values) {
      if (!std::isfinite(v)) throw std::invalid_argument("fit: non-finite feature value");
    }
    if (row.label == 0 || row.label == 1) seen[row.label] = true;
  }
  if (!seen[0] || !seen[1]) {
    throw SingleClassError("fit: training set contains a single class");
  }

  std::unique_ptr<TrainedModel> model;
  switch (spec.family) {
    case LearnerFamily::lda:
      model = fit_linear_discriminant(spec, matrix, /*penalized=*/false);
      break;
    case LearnerFamily::pda:
      model = fit_linear_discriminant(spec, matrix, /*penalized=*/true);
      break;
    case LearnerFamily::mda:
      model = fit_mixture_discriminant(spec, matrix);
      break;
    case LearnerFamily::mars:
      model = fit_mars(spec, matrix);
      break;
    case LearnerFamily::gbm:
      model = fit_gbm(spec, matrix);
      break;
    case LearnerFamily::rf:
      model = fit_random_forest(spec, matrix);
      break;
  }
  model->ledger_ = matrix.ledger;
  model->training_rows_ = static_cast<long>(matrix.rows.size());
  return model;
}

std::vector<Prediction> predict_matrix(const TrainedModel& model,
                                       const features::FeatureMatrix& matrix) {
  if (model.ledger() != matrix.ledger) {
    throw std::invalid_argument("predict: matrix ledger does not match the model's ledger");
  }
  std::vector<Prediction> out;
  out.reserve(matrix.rows.size());
  for (const auto& row : matrix.rows) out.push_back(model.predict(row.values));
  return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

void TrainedModel::save(std::ostream& out) const {
  out << "fleetpdm-model 1\n";
  out << "family " << family_name(family()) << '\n';
  out << "rows " << training_rows_ << '\n';
  out << "ledger " << ledger_.size() << '\n';
  for (const auto& name : ledger_) out << name << '\n';
  out << "params\n";
  save_params(out);
  out << "end\n";
}

class ModelReader {
 public:
  explicit ModelReader(std::istream& in) : in_(in) {}

  std::unique_ptr<TrainedModel> read() {
    expect_word("fleetpdm-model");
    expect_word("1");
    expect_word("family");
    std::string fam = word();
    expect_word("rows");
    long rows = integer();
    expect_word("ledger");
    long n = integer();
    std::vector<std::string> ledger;
    ledger.reserve(static_cast<std::size_t>(n));
    skip_line();
    for (long i = 0; i < n; ++i) ledger.push_back(line());
    expect_word("params");

    std::unique_ptr<TrainedModel> model;
    switch (family_from_name(fam)) {
      case LearnerFamily::lda:
      case LearnerFamily::pda:
        model = read_discriminant(family_from_name(fam));
        break;
      case LearnerFamily::mda:
        model = read_mda();
        break;
      case LearnerFamily::mars:
        model = read_mars();
        break;
      case LearnerFamily::gbm:
        model = read_gbm();
        break;
      case LearnerFamily::rf:
        model = read_rf();
        break;
    }
    expect_word("end");
    model->ledger_ = std::move(ledger);
    model->training_rows_ = rows;
    return model;
  }

 private:
  std::istream& in_;

  [[noreturn]] void fail(const std::string& what) {
    throw std::runtime_error("model load: " + what);
  }
  std::string word() {
    std::string w;
    if (!(in_ >> w)) fail("unexpected end of stream");
    return w;
  }
  void expect_word(const std::string& expected) {
    std::string got = word();
    if (got != expected) fail("expected \"" + expected + "\", got \"" + got + "\"");
  }
  long integer() {
    long v = 0;
    if (!(in_ >> v)) fail("expected an integer");
    return v;
  }
  double real() {
    double v = 0;
    if (!(in_ >> v)) fail("expected a number");
    return v;
  }
  void skip_line() {
    std::string rest;
    std::getline(in_, rest);
  }
  std::string line() {
    std::string text;
    if (!std::getline(in_, text)) fail("unexpected end of stream");
    return text;
  }
  std::vector<double> reals(std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = real();
    return v;
  }

  std::unique_ptr<TrainedModel> read_discriminant(LearnerFamily fam) {
    auto m = std::unique_ptr<DiscriminantModel>(new DiscriminantModel());
    m->family_ = fam;
    expect_word("kept");
    long k = integer();
    m->kept_.resize(static_cast<std::size_t>(k));
    for (auto& i : m->kept_) i = static_cast<int>(integer());
    expect_word("ridge");
    m->ridge_ = real();
    for (int c = 0; c < 2; ++c) {
      expect_word("mean");
      m->class_means_[c] = reals(static_cast<std::size_t>(k));
      expect_word("weight");
      m->weights_[c] = reals(static_cast<std::size_t>(k));
      expect_word("bias");
      m->bias_[c] = real();
    }
    return m;
  }

  std::unique_ptr<TrainedModel> read_mda() {
    auto m = std::unique_ptr<MixtureDiscriminantModel>(new MixtureDiscriminantModel());
    expect_word("kept");
    long k = integer();
    m->kept_.resize(static_cast<std::size_t>(k));
    for (auto& i : m->kept_) i = static_cast<int>(integer());
    expect_word("log_prior");
    m->class_log_prior_[0] = real();
    m->class_log_prior_[1] = real();
    for (int c = 0; c < 2; ++c) {
      expect_word("subclasses");
      long r = integer();
      expect_word("weights");
      m->mix_weights_[c] = reals(static_cast<std::size_t>(r));
      m->mix_means_[c].resize(static_cast<std::size_t>(r));
      for (auto& mean : m->mix_means_[c]) {
        expect_word("mean");
        mean = reals(static_cast<std::size_t>(k));
      }
    }
    expect_word("covariance");
    m->covariance_ = reals(static_cast<std::size_t>(k * k));
    expect_word("em");
    m->em_.iterations = static_cast<int>(integer());
    m->em_.converged = integer() != 0;
    long traces = integer();
    m->em_.log_likelihood = reals(static_cast<std::size_t>(traces));
    m->finalize();
    return m;
  }

  std::unique_ptr<TrainedModel> read_mars() {
    auto m = std::unique_ptr<MarsModel>(new MarsModel());
    expect_word("terms");
    long k = integer();
    m->terms_.resize(static_cast<std::size_t>(k));
    for (auto& t : m->terms_) {
      t.variable = static_cast<int>(integer());
      t.knot = real();
      t.sign = static_cast<int>(integer());
    }
    expect_word("coef");
    m->coef_ = reals(static_cast<std::size_t>(k));
    expect_word("gcv");
    m->forward_gcv_ = real();
    m->pruned_gcv_ = real();
    return m;
  }

  Tree read_tree() {
    expect_word("nodes");
    long k = integer();
    Tree tree;
    tree.nodes.resize(static_cast<std::size_t>(k));
    for (auto& n : tree.nodes) {
      n.feature = static_cast<int>(integer());
      n.threshold = real();
      n.left = static_cast<int>(integer());
      n.right = static_cast<int>(integer());
      n.value = real();
    }
    return tree;
  }

  std::unique_ptr<TrainedModel> read_gbm() {
    auto m = std::unique_ptr<GbmModel>(new GbmModel());
    expect_word("f0");
    m->f0_ = real();
    expect_word("deviance");
    long k = integer();
    m->deviance_ = reals(static_cast<std::size_t>(k));
    expect_word("trees");
    long n = integer();
    m->trees_.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) m->trees_.push_back(read_tree());
    return m;
  }

  std::unique_ptr<TrainedModel> read_rf() {
    auto m = std::unique_ptr<RandomForestModel>(new RandomForestModel());
    expect_word("mtry");
    m->mtry_used_ = static_cast<int>(integer());
    expect_word("seed");
    unsigned long long seed = 0;
    if (!(in_ >> seed)) fail("expected a seed");
    m->seed_ = seed;
    expect_word("trees");
    long n = integer();
    m->trees_.reserve(static_cast<std::size_t>(n));
    m->oob_.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
      m->trees_.push_back(read_tree());
      expect_word("oob");
      long k = integer();
      std::vector<int> rows(static_cast<std::size_t>(k));
      for (auto& r : rows) r = static_cast<int>(integer());
      m->oob_.push_back(std::move(rows));
    }
    return m;
  }
};

std::unique_ptr<TrainedModel> TrainedModel::load(std::istream& in) {
  return ModelReader(in).read();
}

void save_model(const TrainedModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  model.save(out);
  if (!out) throw std::runtime_error("model write failed: " + path);
}

std::unique_ptr<TrainedModel> load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read model file: " + path);
  return TrainedModel::load(in);
}

// Shared helper for parameter emission.
void write_real_list(std::ostream& out, const std::vector<double>& v) {
  for (double x : v) {
    out << ' ';
    write_double(out, x);
  }
}

void write_real(std::ostream& out, double v) { write_double(out, v); }

}  // namespace fleetpdm::learners
