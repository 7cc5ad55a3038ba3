#include "noir/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "noir/error.hpp"
#include "noir/rng.hpp"

namespace noir {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Dual coordinate descent for the L1-loss linear SVM: min 1/2 w.w + C sum hinge,
// bias folded in as an extra constant feature. Stops when the spread of the
// projected gradient falls below the tolerance.
Eigen::VectorXd train_binary_svm(const Eigen::MatrixXd& x_aug, const std::vector<double>& y, const SvmOptions& o,
                                 Rng& rng) {
  const Eigen::Index n = x_aug.rows();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(x_aug.cols());
  std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
  std::vector<double> qii(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) qii[i] = x_aug.row(i).squaredNorm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < o.max_epochs; ++epoch) {
    shuffle(order, rng);
    double pg_max = kNegInf, pg_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index i : order) {
      const double g = y[i] * x_aug.row(i).dot(w) - 1.0;
      double pg = g;
      if (alpha[i] <= 0.0) {
        pg = std::min(g, 0.0);
      } else if (alpha[i] >= o.c) {
        pg = std::max(g, 0.0);
      }
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (std::abs(pg) > 1e-12 && qii[i] > 0.0) {
        const double old = alpha[i];
        alpha[i] = std::clamp(old - g / qii[i], 0.0, o.c);
        w += (alpha[i] - old) * y[i] * x_aug.row(i).transpose();
      }
    }
    if (pg_max - pg_min < o.tolerance) break;
  }
  return w;
}

Classifier fit_svm(const Eigen::MatrixXd& x, const std::vector<int>& labels, int n_classes,
                   const std::vector<bool>& present, const SvmOptions& opts) {
  const Eigen::Index n = x.rows(), d = x.cols();
  LinearSvmModel m;
  m.mean = x.colwise().mean().transpose();
  m.scale.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double sd = std::sqrt((x.col(j).array() - m.mean[j]).square().sum() / static_cast<double>(n));
    m.scale[j] = sd > 1e-12 ? 1.0 / sd : 1.0;
  }
  Eigen::MatrixXd xa(n, d + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    xa.row(i).head(d) = ((x.row(i).transpose() - m.mean).array() * m.scale.array()).transpose();
    xa(i, d) = 1.0;
  }
  m.weights = Eigen::MatrixXd::Zero(n_classes, d + 1);
  Rng rng = make_rng(opts.seed, "svm");
  for (int c = 0; c < n_classes; ++c) {
    if (!present[c]) continue;
    std::vector<double> y(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) y[i] = labels[i] == c ? 1.0 : -1.0;
    m.weights.row(c) = train_binary_svm(xa, y, opts, rng).transpose();
  }
  return Classifier::from_svm(n_classes, present, std::move(m));
}

Classifier fit_qda(const Eigen::MatrixXd& x, const std::vector<int>& labels, int n_classes,
                   const std::vector<bool>& present) {
  const Eigen::Index d = x.cols();
  QdaModel m;
  m.means.assign(n_classes, Eigen::VectorXd::Zero(d));
  m.precision.assign(n_classes, Eigen::MatrixXd::Identity(d, d));
  m.log_norm.assign(n_classes, kNegInf);
  for (int c = 0; c < n_classes; ++c) {
    if (!present[c]) continue;
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) rows.push_back(static_cast<Eigen::Index>(i));
    }
    Eigen::MatrixXd xc(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t i = 0; i < rows.size(); ++i) xc.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
    const Eigen::VectorXd mu = xc.colwise().mean().transpose();
    const Eigen::MatrixXd centred = xc.rowwise() - mu.transpose();
    Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(rows.size() - 1);
    const double floor = std::max(1e-6 * cov.trace() / static_cast<double>(d), 1e-12);
    cov.diagonal().array() += floor;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
    const double log_det = ldlt.vectorD().array().log().sum();
    m.means[c] = mu;
    m.precision[c] = ldlt.solve(Eigen::MatrixXd::Identity(d, d));
    const double prior = static_cast<double>(rows.size()) / static_cast<double>(labels.size());
    m.log_norm[c] = std::log(prior) - 0.5 * log_det;
  }
  return Classifier::from_qda(n_classes, present, std::move(m));
}

}  // namespace

std::string_view to_string(ClassifierKind k) { return k == ClassifierKind::SVM ? "svm" : "qda"; }

ClassifierKind classifier_kind_from_string(std::string_view s) {
  if (s == "svm" || s == "SVM") return ClassifierKind::SVM;
  if (s == "qda" || s == "QDA") return ClassifierKind::QDA;
  fail(ErrorCode::ParseError, "unknown classifier kind '" + std::string(s) + "'");
}

Classifier Classifier::from_svm(int n_classes, std::vector<bool> present, LinearSvmModel m) {
  Classifier c;
  c.kind_ = ClassifierKind::SVM;
  c.n_classes_ = n_classes;
  c.present_ = std::move(present);
  c.svm_ = std::move(m);
  return c;
}

Classifier Classifier::from_qda(int n_classes, std::vector<bool> present, QdaModel m) {
  Classifier c;
  c.kind_ = ClassifierKind::QDA;
  c.n_classes_ = n_classes;
  c.present_ = std::move(present);
  c.qda_ = std::move(m);
  return c;
}

Eigen::VectorXd Classifier::scores(const Eigen::VectorXd& x) const {
  Eigen::VectorXd s = Eigen::VectorXd::Constant(n_classes_, kNegInf);
  if (kind_ == ClassifierKind::SVM) {
    const Eigen::Index d = svm_.mean.size();
    if (x.size() != d) fail(ErrorCode::ShapeMismatch, "feature length mismatch");
    Eigen::VectorXd xa(d + 1);
    xa.head(d) = (x - svm_.mean).cwiseProduct(svm_.scale);
    xa[d] = 1.0;
    for (int c = 0; c < n_classes_; ++c) {
      if (present_[c]) s[c] = svm_.weights.row(c).dot(xa);
    }
  } else {
    for (int c = 0; c < n_classes_; ++c) {
      if (!present_[c]) continue;
      const Eigen::VectorXd diff = x - qda_.means[c];
      s[c] = qda_.log_norm[c] - 0.5 * diff.dot(qda_.precision[c] * diff);
    }
  }
  return s;
}

int Classifier::predict(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd s = scores(x);
  int best = 0;
  for (int c = 1; c < s.size(); ++c) {
    if (s[c] > s[best]) best = c;
  }
  return best;
}

Classifier classifier_fit(const Eigen::MatrixXd& features, const std::vector<int>& labels, ClassifierKind kind,
                          int n_classes, const SvmOptions& opts) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    fail(ErrorCode::ShapeMismatch, "feature rows and labels differ in length");
  }
  if (!features.allFinite()) fail(ErrorCode::InvalidArgument, "non-finite features");
  std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
  for (int l : labels) {
    if (l < 0 || l >= n_classes) fail(ErrorCode::InvalidArgument, "label out of range");
    ++counts[l];
  }
  std::vector<bool> present(static_cast<std::size_t>(n_classes));
  int n_present = 0;
  for (int c = 0; c < n_classes; ++c) {
    present[c] = counts[c] > 0;
    if (counts[c] == 1) fail(ErrorCode::DegenerateClass, "class " + std::to_string(c) + " has a single sample");
    n_present += present[c] ? 1 : 0;
  }
  if (n_present < 2) fail(ErrorCode::DegenerateClass, "need at least two classes");
  return kind == ClassifierKind::SVM ? fit_svm(features, labels, n_classes, present, opts)
                                     : fit_qda(features, labels, n_classes, present);
}

}  // namespace noir
