#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace noir {

enum class ClassifierKind { SVM, QDA };

std::string_view to_string(ClassifierKind k);
ClassifierKind classifier_kind_from_string(std::string_view s);

/// One-vs-rest linear SVM on z-scored features. Row c of `weights` holds
/// [w_c, b_c]; the bias is learned through an appended constant feature.
struct LinearSvmModel {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  Eigen::MatrixXd weights;
};

/// Per-class Gaussian. `precision[c]` is the inverse of the ridged class
/// covariance; `log_norm[c]` = log prior - 0.5 log det.
struct QdaModel {
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> precision;
  std::vector<double> log_norm;
};

struct SvmOptions {
  double c = 1.0;
  double tolerance = 1e-4;
  int max_epochs = 20000;
  std::uint64_t seed = 0;
};

class Classifier {
 public:
  Classifier() = default;

  ClassifierKind kind() const { return kind_; }
  int n_classes() const { return n_classes_; }
  /// Classes that had training samples.
  const std::vector<bool>& present() const { return present_; }

  /// One score per class; classes without training data score -infinity.
  Eigen::VectorXd scores(const Eigen::VectorXd& x) const;
  int predict(const Eigen::VectorXd& x) const;

  const LinearSvmModel& svm() const { return svm_; }
  const QdaModel& qda() const { return qda_; }

  static Classifier from_svm(int n_classes, std::vector<bool> present, LinearSvmModel m);
  static Classifier from_qda(int n_classes, std::vector<bool> present, QdaModel m);

 private:
  ClassifierKind kind_ = ClassifierKind::SVM;
  int n_classes_ = 0;
  std::vector<bool> present_;
  LinearSvmModel svm_;
  QdaModel qda_;
};

/// Labels are class ordinals in [0, n_classes). Needs at least two classes
/// with samples; every present class needs at least two samples.
Classifier classifier_fit(const Eigen::MatrixXd& features, const std::vector<int>& labels, ClassifierKind kind,
                          int n_classes, const SvmOptions& opts = {});

}  // namespace noir
