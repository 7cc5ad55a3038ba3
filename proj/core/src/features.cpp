#include "noir/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "noir/error.hpp"
#include "noir/text.hpp"

namespace noir {
namespace {

constexpr double kGradientFloor = 0.08;
constexpr double kCoordWeight = 0.1;
constexpr double kGradWeight = 16.0;
constexpr double kVarianceFloor = 1e-12;

void finalize_cell(FeatureMap& m, std::size_t idx, bool textured) {
  double* v = &m.data[idx * m.dim];
  double n2 = 0.0;
  for (int k = 0; k < m.dim; ++k) n2 += v[k] * v[k];
  m.valid[idx] = n2 > 0.0 ? 1 : 0;
  m.textured[idx] = textured ? 1 : 0;
  if (n2 > 0.0) {
    const double inv = 1.0 / std::sqrt(n2);
    for (int k = 0; k < m.dim; ++k) v[k] *= inv;
  }
}

// Mean of the valid cells in the clipped 3x3 neighbourhood.
std::vector<double> neighbourhood(const FeatureMap& m, int r, int c) {
  std::vector<double> q(static_cast<std::size_t>(m.dim), 0.0);
  int n = 0;
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      const int rr = r + dr, cc = c + dc;
      if (rr < 0 || cc < 0 || rr >= m.rows || cc >= m.cols || !m.is_valid(rr, cc)) continue;
      const double* v = m.cell(rr, cc);
      for (int k = 0; k < m.dim; ++k) q[k] += v[k];
      ++n;
    }
  }
  if (n > 0) {
    for (auto& x : q) x /= n;
  }
  return q;
}

}  // namespace

bool FeatureMap::same_grid(const FeatureMap& o) const {
  return rows == o.rows && cols == o.cols && dim == o.dim && backend_id == o.backend_id;
}

FeatureMap ReferenceBackend::extract(const Image& img) const {
  if (img.width < kCell || img.height < kCell) fail(ErrorCode::UnsupportedDims, "image smaller than one cell");
  FeatureMap m;
  m.rows = img.height / kCell;
  m.cols = img.width / kCell;
  m.dim = kDim;
  m.source_width = img.width;
  m.source_height = img.height;
  m.backend_id = id();
  const std::size_t cells = static_cast<std::size_t>(m.rows) * m.cols;
  m.data.assign(cells * kDim, 0.0);
  m.valid.assign(cells, 0);
  m.textured.assign(cells, 0);

  std::vector<double> gray(static_cast<std::size_t>(img.width) * img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const std::uint8_t* p = img.px(x, y);
      gray[static_cast<std::size_t>(y) * img.width + x] = (0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]) / 255.0;
    }
  }
  auto g = [&](int x, int y) {
    x = std::clamp(x, 0, img.width - 1);
    y = std::clamp(y, 0, img.height - 1);
    return gray[static_cast<std::size_t>(y) * img.width + x];
  };

  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      const std::size_t idx = static_cast<std::size_t>(r) * m.cols + c;
      double* v = &m.data[idx * kDim];
      double sum = 0.0, sum2 = 0.0;
      int edges = 0;
      for (int y = r * kCell; y < (r + 1) * kCell; ++y) {
        for (int x = c * kCell; x < (c + 1) * kCell; ++x) {
          const std::uint8_t* p = img.px(x, y);
          for (int k = 0; k < 3; ++k) v[k] += p[k] / 255.0;
          const double i = g(x, y);
          sum += i;
          sum2 += i * i;
          const double gx = 0.5 * (g(x + 1, y) - g(x - 1, y));
          const double gy = 0.5 * (g(x, y + 1) - g(x, y - 1));
          const double mag = std::hypot(gx, gy);
          if (mag > kGradientFloor) {
            double ang = std::atan2(gy, gx);
            if (ang < 0.0) ang += std::numbers::pi;
            const int bin = std::min(7, static_cast<int>(ang / std::numbers::pi * 8.0));
            v[3 + bin] += mag;
            ++edges;
          }
        }
      }
      const double n = kCell * kCell;
      for (int k = 0; k < 3; ++k) v[k] /= n;
      for (int k = 3; k < 11; ++k) v[k] *= kGradWeight / n;
      const double mean = sum / n;
      v[11] = std::max(0.0, sum2 / n - mean * mean);
      v[12] = kCoordWeight * (c + 0.5) / m.cols;
      v[13] = kCoordWeight * (r + 0.5) / m.rows;
      v[14] = mean;
      v[15] = static_cast<double>(edges) / n;
      finalize_cell(m, idx, edges > 0 || v[11] > kVarianceFloor);
    }
  }
  return m;
}

FeatureMap ExternalBackend::extract(const Image& img) const {
  if (img.source.empty()) fail(ErrorCode::UnknownBackend, "external features need an image read from disk");
  std::filesystem::path p(img.source);
  p.replace_extension(".feat");
  FeatureMap m = read_feat(p.string(), img.width, img.height);
  return m;
}

std::unique_ptr<FeatureBackend> make_backend(std::string_view id) {
  if (id == "reference") return std::make_unique<ReferenceBackend>();
  if (id == "external") return std::make_unique<ExternalBackend>();
  fail(ErrorCode::UnknownBackend, "unknown feature backend '" + std::string(id) + "'");
}

FeatureMap extract_feature_map(const Image& img, std::string_view backend_id) {
  return make_backend(backend_id)->extract(img);
}

void write_feat(const std::string& path, const FeatureMap& map) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::ParseError, "cannot write " + path);
  out << map.rows << ' ' << map.cols << ' ' << map.dim << '\n';
  char buf[32];
  for (int r = 0; r < map.rows; ++r) {
    for (int c = 0; c < map.cols; ++c) {
      const double* v = map.cell(r, c);
      for (int k = 0; k < map.dim; ++k) {
        std::snprintf(buf, sizeof buf, "%.9e", v[k]);
        out << (k ? " " : "") << buf;
      }
      out << '\n';
    }
  }
}

FeatureMap read_feat(const std::string& path, int source_width, int source_height) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ParseError, "cannot open feature file " + path);
  FeatureMap m;
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::ParseError, path + ": empty feature file");
  const auto head = text::tokens(line);
  if (head.size() != 3) fail(ErrorCode::ParseError, path + ": header must be 'rows cols dim'");
  m.rows = static_cast<int>(text::parse_int(head[0]));
  m.cols = static_cast<int>(text::parse_int(head[1]));
  m.dim = static_cast<int>(text::parse_int(head[2]));
  if (m.rows < 1 || m.cols < 1 || m.dim < 1) fail(ErrorCode::UnsupportedDims, path + ": empty grid");
  if (source_width < m.cols || source_height < m.rows) fail(ErrorCode::UnsupportedDims, path + ": grid exceeds image");
  m.source_width = source_width;
  m.source_height = source_height;
  m.backend_id = "external";
  const std::size_t cells = static_cast<std::size_t>(m.rows) * m.cols;
  m.data.reserve(cells * m.dim);
  std::string tok;
  while (in >> tok) m.data.push_back(text::parse_double(tok));
  if (m.data.size() != cells * m.dim) fail(ErrorCode::ParseError, path + ": wrong number of values");
  m.valid.assign(cells, 0);
  m.textured.assign(cells, 1);
  for (std::size_t i = 0; i < cells; ++i) {
    for (int k = 0; k < m.dim; ++k) {
      if (!std::isfinite(m.data[i * m.dim + k])) fail(ErrorCode::ParseError, path + ": non-finite value");
    }
    finalize_cell(m, i, true);
  }
  return m;
}

std::vector<double> match_scores(const FeatureMap& train, const Pixel& train_xy, const FeatureMap& test) {
  if (!train.same_grid(test)) fail(ErrorCode::BackendMismatch, "feature maps differ in backend or grid");
  if (!(train_xy.u >= 0.0 && train_xy.v >= 0.0 && train_xy.u < train.source_width &&
        train_xy.v < train.source_height)) {
    fail(ErrorCode::OutOfBounds, "training point outside the image");
  }
  const int tc = std::min(train.cols - 1, static_cast<int>(train_xy.u / train.cell_width()));
  const int tr = std::min(train.rows - 1, static_cast<int>(train_xy.v / train.cell_height()));
  const std::vector<double> q = neighbourhood(train, tr, tc);
  std::vector<double> out(static_cast<std::size_t>(test.rows) * test.cols, -1.0);
  for (int r = 0; r < test.rows; ++r) {
    for (int c = 0; c < test.cols; ++c) {
      if (!test.is_valid(r, c)) continue;
      out[static_cast<std::size_t>(r) * test.cols + c] = cosine(q, neighbourhood(test, r, c));
    }
  }
  return out;
}

MatchResult match_parameter(const FeatureMap& train, const Pixel& train_xy, const FeatureMap& test) {
  const std::vector<double> s = match_scores(train, train_xy, test);
  MatchResult best;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] > s[arg]) arg = i;
  }
  best.row = static_cast<int>(arg / test.cols);
  best.col = static_cast<int>(arg % test.cols);
  best.score = s[arg];
  best.textured = test.textured[arg] != 0;
  best.pixel = {(best.col + 0.5) * test.cell_width(), (best.row + 0.5) * test.cell_height()};
  return best;
}

std::vector<double> pooled(const FeatureMap& map, int block) {
  const int pr = (map.rows + block - 1) / block, pc = (map.cols + block - 1) / block;
  std::vector<double> out(static_cast<std::size_t>(pr) * pc * map.dim, 0.0);
  std::vector<int> counts(static_cast<std::size_t>(pr) * pc, 0);
  for (int r = 0; r < map.rows; ++r) {
    for (int c = 0; c < map.cols; ++c) {
      if (!map.is_valid(r, c)) continue;
      const std::size_t b = static_cast<std::size_t>(r / block) * pc + c / block;
      const double* v = map.cell(r, c);
      for (int k = 0; k < map.dim; ++k) out[b * map.dim + k] += v[k];
      ++counts[b];
    }
  }
  for (std::size_t b = 0; b < counts.size(); ++b) {
    if (counts[b] == 0) continue;
    for (int k = 0; k < map.dim; ++k) out[b * map.dim + k] /= counts[b];
  }
  return out;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) fail(ErrorCode::ShapeMismatch, "vectors differ in length");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa <= 0.0 || bb <= 0.0) return 0.0;
  return std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
}

}  // namespace noir
