#include "noir/calibration_io.hpp"

#include <fstream>
#include <sstream>

#include "noir/eeg_io.hpp"
#include "noir/error.hpp"
#include "noir/text.hpp"

namespace noir {
namespace {

using Fmt = std::string (*)(double);

std::string fmt9(double v) { return format_value(v); }

std::string matrix_text(const Eigen::MatrixXd& m, Fmt f) {
  std::ostringstream os;
  os << m.rows() << ' ' << m.cols();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << ' ' << f(m(r, c));
  }
  return os.str();
}

std::string vector_text(const Eigen::VectorXd& v, Fmt f) {
  std::ostringstream os;
  os << v.size();
  for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << f(v[i]);
  return os.str();
}

Eigen::MatrixXd parse_matrix(const std::string& s) {
  const auto t = text::tokens(s);
  if (t.size() < 2) fail(ErrorCode::ParseError, "matrix needs rows and cols");
  const auto rows = text::parse_int(t[0]), cols = text::parse_int(t[1]);
  if (rows < 0 || cols < 0 || t.size() != static_cast<std::size_t>(2 + rows * cols)) {
    fail(ErrorCode::ParseError, "matrix entry count mismatch");
  }
  Eigen::MatrixXd m(rows, cols);
  for (long long r = 0; r < rows; ++r) {
    for (long long c = 0; c < cols; ++c) m(r, c) = text::parse_double(t[2 + r * cols + c]);
  }
  return m;
}

Eigen::VectorXd parse_vector(const std::string& s) {
  const auto t = text::tokens(s);
  if (t.empty()) fail(ErrorCode::ParseError, "empty vector");
  const auto n = text::parse_int(t[0]);
  if (n < 0 || t.size() != static_cast<std::size_t>(1 + n)) fail(ErrorCode::ParseError, "vector length mismatch");
  Eigen::VectorXd v(n);
  for (long long i = 0; i < n; ++i) v[i] = text::parse_double(t[1 + i]);
  return v;
}

std::string layout_text(const ChannelLayout& l) {
  std::string s;
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (i) s += ',';
    s += l[i].name + ":" + std::string(to_string(l[i].region));
  }
  return s;
}

ChannelLayout parse_layout(const std::string& s) {
  std::vector<Channel> ch;
  for (const auto& item : text::split(s, ',')) {
    const auto p = text::split(item, ':');
    if (p.size() != 2) fail(ErrorCode::ParseError, "channel entries are name:Region");
    ch.push_back({p[0], region_from_string(p[1])});
  }
  return ChannelLayout(std::move(ch));
}

const text::Section& need(const std::vector<text::Section>& secs, const std::string& name) {
  for (const auto& s : secs) {
    if (s.name == name) return s;
  }
  fail(ErrorCode::ParseError, "calibration file lacks [" + name + "]");
}

}  // namespace

void write_calibration(std::ostream& os, const MiDecoder& mi, const std::optional<TensionThreshold>& emg) {
  const Classifier& clf = mi.classifier();
  os << "# noir-midec v1\n\n[decoder]\n";
  os << "fs = " << text::exact(mi.fs()) << "\n";
  os << "trial_samples = " << mi.trial_samples() << "\n";
  os << "channels = " << layout_text(mi.layout()) << "\n";
  os << "calib_accuracy = " << text::exact(mi.calib_accuracy()) << "\n\n[bank]\n";
  os << "order = " << mi.bank().order << "\n";
  for (const auto& [lo, hi] : mi.bank().bands) os << "band = " << text::exact(lo) << ' ' << text::exact(hi) << "\n";
  os << "\n[filters]\nm = " << mi.filters().m << "\n";
  for (std::size_t b = 0; b < mi.filters().bands.size(); ++b) {
    const CspFilters& f = mi.filters().bands[b];
    for (std::size_t c = 0; c < f.per_class.size(); ++c) {
      const std::string key = "b" + std::to_string(b) + ".c" + std::to_string(c);
      os << key << ".w = " << matrix_text(f.per_class[c], fmt9) << "\n";
      if (c < f.eigenvalues.size()) os << key << ".ev = " << vector_text(f.eigenvalues[c], fmt9) << "\n";
    }
  }
  os << "\n[selected]\nindices =";
  for (int i : mi.selected()) os << ' ' << i;
  os << "\n\n[classifier " << to_string(clf.kind()) << "]\n";
  os << "n_classes = " << clf.n_classes() << "\npresent =";
  for (bool p : clf.present()) os << ' ' << (p ? 1 : 0);
  os << "\n";
  if (clf.kind() == ClassifierKind::SVM) {
    os << "mean = " << vector_text(clf.svm().mean, text::exact) << "\n";
    os << "scale = " << vector_text(clf.svm().scale, text::exact) << "\n";
    os << "weights = " << matrix_text(clf.svm().weights, text::exact) << "\n";
  } else {
    const QdaModel& q = clf.qda();
    for (std::size_t c = 0; c < q.means.size(); ++c) {
      os << "c" << c << ".mean = " << vector_text(q.means[c], text::exact) << "\n";
      os << "c" << c << ".precision = " << matrix_text(q.precision[c], text::exact) << "\n";
      os << "c" << c << ".log_norm = " << text::exact(q.log_norm[c]) << "\n";
    }
  }
  if (emg) {
    os << "\n[emg]\n";
    os << "threshold = " << text::exact(emg->log_variance_threshold) << "\n";
    os << "rest_mean = " << text::exact(emg->rest.mean) << "\nrest_sd = " << text::exact(emg->rest.sd) << "\n";
    os << "clench_mean = " << text::exact(emg->clench.mean) << "\nclench_sd = " << text::exact(emg->clench.sd)
       << "\n";
    os << "window_s = " << text::exact(emg->window_s) << "\n";
  }
}

CalibrationModel read_calibration(std::istream& is) {
  std::vector<std::string> comments;
  const auto secs = text::parse_sections(is, &comments);
  bool magic = false;
  for (const auto& c : comments) magic = magic || text::trim(c) == "noir-midec v1";
  if (!magic) fail(ErrorCode::ParseError, "not a noir-midec v1 file");

  const auto& dec = need(secs, "decoder");
  const double fs = text::parse_double(dec.get("fs"));
  const int trial_samples = static_cast<int>(text::parse_int(dec.get("trial_samples")));
  const ChannelLayout layout = parse_layout(dec.get("channels"));
  const double acc = text::parse_double(dec.get("calib_accuracy"));

  const auto& bs = need(secs, "bank");
  FilterBank bank;
  bank.order = static_cast<int>(text::parse_int(bs.get("order")));
  bank.bands.clear();
  for (const auto& b : bs.all("band")) {
    const auto t = text::tokens(b);
    if (t.size() != 2) fail(ErrorCode::ParseError, "band = lo hi");
    bank.bands.emplace_back(text::parse_double(t[0]), text::parse_double(t[1]));
  }

  const auto& fsec = need(secs, "filters");
  SpatialFilterSet filters;
  filters.m = static_cast<int>(text::parse_int(fsec.get("m")));
  for (std::size_t b = 0; b < bank.bands.size(); ++b) {
    CspFilters f;
    for (int c = 0;; ++c) {
      const std::string key = "b" + std::to_string(b) + ".c" + std::to_string(c);
      const auto w = fsec.find(key + ".w");
      if (!w) break;
      f.per_class.push_back(parse_matrix(*w));
      if (const auto ev = fsec.find(key + ".ev")) f.eigenvalues.push_back(parse_vector(*ev));
    }
    if (f.per_class.empty()) fail(ErrorCode::ParseError, "missing filters for band " + std::to_string(b));
    filters.bands.push_back(std::move(f));
  }

  std::vector<int> selected;
  for (const auto& t : text::tokens(need(secs, "selected").get("indices"))) {
    selected.push_back(static_cast<int>(text::parse_int(t)));
  }

  const auto& cs = need(secs, "classifier");
  const ClassifierKind kind = classifier_kind_from_string(cs.arg);
  const int n_classes = static_cast<int>(text::parse_int(cs.get("n_classes")));
  std::vector<bool> present;
  for (const auto& t : text::tokens(cs.get("present"))) present.push_back(t == "1");
  if (static_cast<int>(present.size()) != n_classes) fail(ErrorCode::ParseError, "present list length");
  Classifier clf;
  if (kind == ClassifierKind::SVM) {
    LinearSvmModel m;
    m.mean = parse_vector(cs.get("mean"));
    m.scale = parse_vector(cs.get("scale"));
    m.weights = parse_matrix(cs.get("weights"));
    if (m.weights.rows() != n_classes || m.weights.cols() != m.mean.size() + 1 || m.scale.size() != m.mean.size()) {
      fail(ErrorCode::ParseError, "svm parameter shapes disagree");
    }
    clf = Classifier::from_svm(n_classes, present, std::move(m));
  } else {
    QdaModel m;
    for (int c = 0; c < n_classes; ++c) {
      const std::string key = "c" + std::to_string(c);
      m.means.push_back(parse_vector(cs.get(key + ".mean")));
      m.precision.push_back(parse_matrix(cs.get(key + ".precision")));
      m.log_norm.push_back(text::parse_double(cs.get(key + ".log_norm")));
    }
    clf = Classifier::from_qda(n_classes, present, std::move(m));
  }

  std::optional<TensionThreshold> emg;
  for (const auto& s : secs) {
    if (s.name != "emg") continue;
    TensionThreshold th;
    th.log_variance_threshold = text::parse_double(s.get("threshold"));
    th.rest = {text::parse_double(s.get("rest_mean")), text::parse_double(s.get("rest_sd"))};
    th.clench = {text::parse_double(s.get("clench_mean")), text::parse_double(s.get("clench_sd"))};
    th.window_s = text::parse_double(s.get("window_s"));
    emg = th;
  }
  return {MiDecoder(std::move(bank), std::move(filters), std::move(selected), std::move(clf), acc, layout, fs,
                    trial_samples),
          emg};
}

void write_calibration_file(const std::string& path, const MiDecoder& mi, const std::optional<TensionThreshold>& emg) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::ParseError, "cannot write " + path);
  write_calibration(os, mi, emg);
}

CalibrationModel read_calibration_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::CalibrationMissing, "cannot open calibration file " + path);
  return read_calibration(is);
}

}  // namespace noir
