#include "noir/synth.hpp"

#include <array>
#include <cmath>
#include <map>
#include <numbers>

#include "noir/filter.hpp"
#include "noir/rng.hpp"

namespace noir {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

int sample_count(double duration_s, double fs) {
  const int n = static_cast<int>(std::lround(duration_s * fs));
  if (n < 1 || !(duration_s > 0.0)) fail(ErrorCode::InvalidArgument, "duration must be positive");
  return n;
}

// Spatial falloff within a region, by position in the region.
double falloff(int k) {
  static constexpr std::array<double, 4> w{1.0, 0.85, 0.7, 0.6};
  return w[static_cast<std::size_t>(k) % w.size()];
}

double db_to_power(double db) { return std::pow(10.0, db / 10.0); }

double mean_mi_channel_power(const SynthConfig& cfg) {
  const auto rows = cfg.layout.indices({Region::Visual, Region::MotorLeft, Region::MotorRight});
  double acc = 0.0;
  for (const auto& m : cfg.mi_mixing) {
    for (int r : rows) acc += m.row(r).squaredNorm();
  }
  return acc / static_cast<double>(rows.size() * cfg.mi_mixing.size());
}

}  // namespace

std::array<double, kMiSources> default_class_gains(MiClass cls) {
  // mu-left, beta-left, mu-right, beta-right, visual alpha
  switch (cls) {
    case MiClass::LeftHand: return {1.0, 1.0, 0.3, 0.3, 0.5};
    case MiClass::RightHand: return {0.3, 0.3, 1.0, 1.0, 0.5};
    case MiClass::Legs: return {0.3, 1.0, 0.3, 1.0, 0.5};
    case MiClass::Rest: return {1.0, 1.0, 1.0, 1.0, 1.2};
  }
  return {};
}

Eigen::MatrixXd default_mi_mixing(const ChannelLayout& layout, MiClass cls) {
  const auto g = default_class_gains(cls);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(layout.size()), kMiSources);
  int kv = 0, kl = 0, kr = 0;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    switch (layout[i].region) {
      case Region::MotorLeft: {
        const double w = falloff(kl), wb = falloff(kl + 1);
        ++kl;
        m(r, 0) = g[0] * w;
        m(r, 1) = g[1] * wb;
        m(r, 2) = 0.15 * g[2] * w;  // volume conduction from the other hemisphere
        m(r, 3) = 0.15 * g[3] * wb;
        break;
      }
      case Region::MotorRight: {
        const double w = falloff(kr), wb = falloff(kr + 1);
        ++kr;
        m(r, 2) = g[2] * w;
        m(r, 3) = g[3] * wb;
        m(r, 0) = 0.15 * g[0] * w;
        m(r, 1) = 0.15 * g[1] * wb;
        break;
      }
      case Region::Visual: m(r, 4) = g[4] * falloff(kv++); break;
      default: break;
    }
  }
  return m;
}

SynthConfig SynthConfig::defaults(ChannelLayout layout, double fs) {
  SynthConfig c;
  c.fs = fs;
  c.layout = std::move(layout);
  for (MiClass cls : kAllMiClasses) c.mi_mixing[ordinal(cls)] = default_mi_mixing(c.layout, cls);
  const auto vis = c.layout.indices({Region::Visual});
  c.ssvep_gain.resize(static_cast<Eigen::Index>(vis.size()));
  for (std::size_t k = 0; k < vis.size(); ++k) c.ssvep_gain[static_cast<Eigen::Index>(k)] = 1.0 - 0.1 * (k % 4);
  if (c.ssvep_gain.size() > 0) c.ssvep_gain *= 1.0 / std::sqrt(c.ssvep_gain.squaredNorm() / c.ssvep_gain.size());
  return c;
}

double SynthConfig::snr_at(double elapsed_s) const {
  return snr_db + (drift_db_per_min ? *drift_db_per_min * elapsed_s / 60.0 : 0.0);
}

void SynthConfig::validate() const {
  if (!(fs > 0.0)) fail(ErrorCode::InvalidArgument, "fs must be positive");
  const auto n = static_cast<Eigen::Index>(layout.size());
  for (const auto& m : mi_mixing) {
    if (m.rows() != n || m.cols() != kMiSources) fail(ErrorCode::ShapeMismatch, "mixing matrix shape");
    if (Eigen::FullPivLU<Eigen::MatrixXd>(m).rank() < kMiSources) {
      fail(ErrorCode::InvalidArgument, "mixing matrix must have full column rank");
    }
  }
  if (static_cast<std::size_t>(ssvep_gain.size()) != layout.indices({Region::Visual}).size()) {
    fail(ErrorCode::ShapeMismatch, "one SSVEP gain per Visual channel");
  }
  if (!(burst_gain > 0.0)) fail(ErrorCode::InvalidArgument, "burst gain must be positive");
}

Eigen::MatrixXd background_noise(int n_channels, int n_samples, double fs, std::uint64_t seed) {
  static constexpr std::array<double, 7> corners{1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0};
  Rng rng = make_rng(seed, "background");
  Eigen::MatrixXd out(n_channels, n_samples);
  const double white_sd = std::sqrt(0.5);
  const double pink_sd = std::sqrt(0.5 / static_cast<double>(corners.size()));
  std::vector<double> z(static_cast<std::size_t>(n_samples) * (corners.size() + 1) + corners.size());
  for (int ch = 0; ch < n_channels; ++ch) {
    gaussian_fill(rng, z.data(), z.size());
    const double* g = z.data();
    for (int k = 0; k < n_samples; ++k) out(ch, k) = white_sd * *g++;
    for (double fc : corners) {
      const double a = std::exp(-kTwoPi * std::min(fc, 0.45 * fs) / fs);
      const double innov = std::sqrt(1.0 - a * a);
      double state = *g++;  // stationary start
      for (int k = 0; k < n_samples; ++k) {
        out(ch, k) += pink_sd * state;
        state = a * state + innov * *g++;
      }
    }
  }
  return out;
}

Eigen::VectorXd band_noise(int n_samples, double fs, double lo, double hi, std::uint64_t seed) {
  hi = std::min(hi, 0.45 * fs);
  struct Designed {
    FilterCoefficients coeffs;
    double gain;
  };
  thread_local std::map<std::array<double, 3>, Designed> cache;
  auto it = cache.find({lo, hi, fs});
  if (it == cache.end()) {
    FilterCoefficients c = design_filter(FilterSpec::band_pass(lo, hi, fs, 4));
    const double g = std::sqrt(zero_phase_noise_gain(c));
    it = cache.emplace(std::array<double, 3>{lo, hi, fs}, Designed{std::move(c), g}).first;
  }
  Rng rng = make_rng(seed, "band");
  // pad so the forward-backward guard holds even for very short windows
  const int pad = 64;
  Eigen::VectorXd w(n_samples + 2 * pad);
  gaussian_fill(rng, w.data(), w.size());
  const Eigen::VectorXd y = filter_zero_phase(it->second.coeffs, w);
  return y.segment(pad, n_samples) / it->second.gain;
}

SignalComponents gen_ssvep_components(double freq, double duration_s, const SynthConfig& cfg, std::uint64_t index,
                                      double elapsed_s) {
  if (!(freq > 0.0) || 2.0 * freq >= 0.5 * cfg.fs) fail(ErrorCode::AliasedHarmonic, "stimulus frequency too high");
  const int n = sample_count(duration_s, cfg.fs);
  const std::uint64_t seed = derive_seed(cfg.seed, index);
  SignalComponents c;
  c.noise = background_noise(static_cast<int>(cfg.layout.size()), n, cfg.fs, seed);
  c.signal = Eigen::MatrixXd::Zero(c.noise.rows(), n);
  Rng rng = make_rng(seed, "ssvep-phase");
  const double ph1 = kTwoPi * uniform01(rng), ph2 = kTwoPi * uniform01(rng);
  // mean square of sin + 0.5 sin(2x) is 0.625
  const double amp = std::sqrt(db_to_power(cfg.snr_at(elapsed_s)) / 0.625);
  const auto vis = cfg.layout.indices({Region::Visual});
  for (std::size_t k = 0; k < vis.size(); ++k) {
    const double g = amp * cfg.ssvep_gain[static_cast<Eigen::Index>(k)];
    for (int t = 0; t < n; ++t) {
      const double x = kTwoPi * freq * t / cfg.fs;
      c.signal(vis[k], t) = g * (std::sin(x + ph1) + 0.5 * std::sin(2.0 * x + ph2));
    }
  }
  return c;
}

EegSegment gen_ssvep(double freq, double duration_s, const SynthConfig& cfg, std::uint64_t index, double elapsed_s) {
  const SignalComponents c = gen_ssvep_components(freq, duration_s, cfg, index, elapsed_s);
  return EegSegment(c.signal + c.noise, cfg.fs, cfg.layout, elapsed_s);
}

SignalComponents gen_mi_components(MiClass cls, double duration_s, const SynthConfig& cfg, std::uint64_t index,
                                   double elapsed_s) {
  if (duration_s < 1.0) fail(ErrorCode::InvalidArgument, "MI trials must last at least 1 s");
  const int n = sample_count(duration_s, cfg.fs);
  const std::uint64_t seed = derive_seed(cfg.seed, index);
  SignalComponents c;
  c.noise = background_noise(static_cast<int>(cfg.layout.size()), n, cfg.fs, seed);
  Eigen::MatrixXd sources(kMiSources, n);
  static constexpr std::array<std::pair<double, double>, kMiSources> bands{
      {{8.0, 12.0}, {18.0, 26.0}, {8.0, 12.0}, {18.0, 26.0}, {8.0, 12.0}}};
  for (int s = 0; s < kMiSources; ++s) {
    sources.row(s) = band_noise(n, cfg.fs, bands[s].first, bands[s].second, derive_seed(seed, 100 + s)).transpose();
  }
  const double scale = std::sqrt(db_to_power(cfg.snr_at(elapsed_s)) / mean_mi_channel_power(cfg));
  c.signal = scale * cfg.mi_mixing[ordinal(cls)] * sources;
  return c;
}

EegSegment gen_mi(MiClass cls, double duration_s, const SynthConfig& cfg, std::uint64_t index, double elapsed_s) {
  const SignalComponents c = gen_mi_components(cls, duration_s, cfg, index, elapsed_s);
  return EegSegment(c.signal + c.noise, cfg.fs, cfg.layout, elapsed_s);
}

EegSegment gen_emg(bool clench, const SynthConfig& cfg, std::uint64_t index, double window_s) {
  const int n = sample_count(window_s, cfg.fs);
  const std::uint64_t seed = derive_seed(cfg.seed, index);
  Eigen::MatrixXd x = background_noise(static_cast<int>(cfg.layout.size()), n, cfg.fs, seed);
  if (clench) {
    const auto rows = cfg.layout.indices({Region::Frontal});
    for (std::size_t k = 0; k < rows.size(); ++k) {
      x.row(rows[k]) = cfg.burst_gain * band_noise(n, cfg.fs, 20.0, 100.0, derive_seed(seed, 200 + k)).transpose();
    }
  }
  return EegSegment(std::move(x), cfg.fs, cfg.layout);
}

EegSegment inject_blink(const EegSegment& segment, double amplitude, double centre_s, double width_ms) {
  Eigen::MatrixXd x = segment.data();
  const double sigma = width_ms / 1000.0 / 2.3548;  // width is FWHM
  for (std::size_t i = 0; i < segment.layout().size(); ++i) {
    const Channel& ch = segment.layout()[i];
    if (ch.region != Region::Frontal) continue;
    const double w = ch.name.rfind("Fp", 0) == 0 ? 1.0 : 0.6;
    for (int t = 0; t < segment.n_samples(); ++t) {
      const double dt = t / segment.fs() - centre_s;
      x(static_cast<Eigen::Index>(i), t) += w * amplitude * std::exp(-0.5 * dt * dt / (sigma * sigma));
    }
  }
  return segment.with_data(std::move(x));
}

EegSegment inject_lateral_eye(const EegSegment& segment, double amplitude, double onset_s) {
  Eigen::MatrixXd x = segment.data();
  for (std::size_t i = 0; i < segment.layout().size(); ++i) {
    const Channel& ch = segment.layout()[i];
    if (ch.region != Region::Frontal || ch.name.empty() || !std::isdigit(static_cast<unsigned char>(ch.name.back()))) {
      continue;
    }
    const double sign = (ch.name.back() - '0') % 2 == 1 ? 1.0 : -1.0;
    for (int t = 0; t < segment.n_samples(); ++t) {
      // smooth saccade step, ~40 ms rise
      const double u = (t / segment.fs() - onset_s) / 0.04;
      x(static_cast<Eigen::Index>(i), t) += sign * amplitude / (1.0 + std::exp(-u));
    }
  }
  return segment.with_data(std::move(x));
}

EegSegment inject_drift(const EegSegment& segment, double freq_hz, double amplitude) {
  Eigen::MatrixXd x = segment.data();
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (int t = 0; t < segment.n_samples(); ++t) x(r, t) += amplitude * std::sin(kTwoPi * freq_hz * t / segment.fs());
  }
  return segment.with_data(std::move(x));
}

std::vector<MiTrial> Synth::mi_session(int per_class, double duration_s) {
  std::vector<MiTrial> out;
  out.reserve(static_cast<std::size_t>(per_class * kMiClasses));
  for (int k = 0; k < per_class; ++k) {
    for (MiClass c : kAllMiClasses) out.push_back({mi(c, duration_s), c});
  }
  return out;
}

}  // namespace noir
