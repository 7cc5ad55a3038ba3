#include "noir/signal.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace noir {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidBand: return "InvalidBand";
    case ErrorCode::SegmentTooShort: return "SegmentTooShort";
    case ErrorCode::StreamTooShort: return "StreamTooShort";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::AliasedHarmonic: return "AliasedHarmonic";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::NoVisualChannels: return "NoVisualChannels";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::InsufficientTrials: return "InsufficientTrials";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::TooFewTrials: return "TooFewTrials";
    case ErrorCode::DegenerateClass: return "DegenerateClass";
    case ErrorCode::NoMotorChannels: return "NoMotorChannels";
    case ErrorCode::Inseparable: return "Inseparable";
    case ErrorCode::WrongWindowLength: return "WrongWindowLength";
    case ErrorCode::NoFrontalChannels: return "NoFrontalChannels";
    case ErrorCode::InvalidMode: return "InvalidMode";
    case ErrorCode::PlanExhausted: return "PlanExhausted";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::UnknownObject: return "UnknownObject";
    case ErrorCode::UnknownSkill: return "UnknownSkill";
    case ErrorCode::UndeclaredObject: return "UndeclaredObject";
    case ErrorCode::UnsupportedDims: return "UnsupportedDims";
    case ErrorCode::UnknownBackend: return "UnknownBackend";
    case ErrorCode::BackendMismatch: return "BackendMismatch";
    case ErrorCode::LineOutOfFrame: return "LineOutOfFrame";
    case ErrorCode::TerminalState: return "TerminalState";
    case ErrorCode::SingularCalibration: return "SingularCalibration";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::CalibrationMissing: return "CalibrationMissing";
  }
  return "Unknown";
}

std::string_view to_string(Region r) {
  switch (r) {
    case Region::Visual: return "Visual";
    case Region::MotorLeft: return "MotorLeft";
    case Region::MotorRight: return "MotorRight";
    case Region::Frontal: return "Frontal";
    case Region::Other: return "Other";
  }
  return "Other";
}

Region region_from_string(std::string_view s) {
  for (Region r : {Region::Visual, Region::MotorLeft, Region::MotorRight, Region::Frontal, Region::Other}) {
    if (to_string(r) == s) return r;
  }
  fail(ErrorCode::ParseError, "unknown region '" + std::string(s) + "'");
}

ChannelLayout::ChannelLayout(std::vector<Channel> channels) : channels_(std::move(channels)) {
  if (channels_.empty()) fail(ErrorCode::InvalidArgument, "channel layout is empty");
  std::set<std::string> seen;
  for (const auto& c : channels_) {
    if (c.name.empty()) fail(ErrorCode::InvalidArgument, "empty channel name");
    if (!seen.insert(c.name).second) fail(ErrorCode::InvalidArgument, "duplicate channel name " + c.name);
  }
}

std::vector<int> ChannelLayout::indices(std::initializer_list<Region> regions) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    if (std::find(regions.begin(), regions.end(), channels_[i].region) != regions.end()) {
      out.push_back(static_cast<int>(i));
    }
  }
  return out;
}

ChannelLayout ChannelLayout::subset(const std::vector<int>& rows) const {
  std::vector<Channel> picked;
  picked.reserve(rows.size());
  for (int r : rows) picked.push_back(channels_.at(static_cast<std::size_t>(r)));
  return ChannelLayout(std::move(picked));
}

ChannelLayout ChannelLayout::standard16() {
  return ChannelLayout({
      {"O1", Region::Visual},     {"Oz", Region::Visual},     {"O2", Region::Visual},     {"POz", Region::Visual},
      {"C3", Region::MotorLeft},  {"FC3", Region::MotorLeft}, {"CP3", Region::MotorLeft}, {"C5", Region::MotorLeft},
      {"C4", Region::MotorRight}, {"FC4", Region::MotorRight}, {"CP4", Region::MotorRight}, {"C6", Region::MotorRight},
      {"Fp1", Region::Frontal},   {"Fp2", Region::Frontal},   {"F7", Region::Frontal},    {"F8", Region::Frontal},
  });
}

EegSegment::EegSegment(Eigen::MatrixXd data, double fs, ChannelLayout layout, double t0)
    : data_(std::move(data)), fs_(fs), layout_(std::move(layout)), t0_(t0) {
  if (!(fs_ > 0.0) || !std::isfinite(fs_)) fail(ErrorCode::InvalidArgument, "sampling rate must be positive");
  if (data_.cols() < 1) fail(ErrorCode::InvalidArgument, "segment has no samples");
  if (static_cast<std::size_t>(data_.rows()) != layout_.size()) {
    fail(ErrorCode::ShapeMismatch, "data rows do not match channel layout");
  }
  if (!data_.allFinite()) fail(ErrorCode::InvalidArgument, "segment contains non-finite values");
}

EegSegment EegSegment::select(std::initializer_list<Region> regions, ErrorCode missing) const {
  const auto rows = layout_.indices(regions);
  if (rows.empty()) fail(missing, "no channels in the requested regions");
  Eigen::MatrixXd picked(static_cast<Eigen::Index>(rows.size()), data_.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) picked.row(static_cast<Eigen::Index>(i)) = data_.row(rows[i]);
  return EegSegment(std::move(picked), fs_, layout_.subset(rows), t0_);
}

EegSegment EegSegment::with_data(Eigen::MatrixXd data) const { return EegSegment(std::move(data), fs_, layout_, t0_); }

std::vector<EegSegment> window_segments(const EegSegment& stream, double length_s, double stride_s) {
  if (!(length_s > 0.0) || !(stride_s > 0.0)) fail(ErrorCode::InvalidArgument, "window length and stride must be positive");
  const long len = std::lround(length_s * stream.fs());
  if (stride_s * stream.fs() < 0.5) fail(ErrorCode::InvalidArgument, "stride shorter than one sample");
  if (len < 1) fail(ErrorCode::InvalidArgument, "window shorter than one sample");
  if (len > stream.n_samples()) fail(ErrorCode::StreamTooShort, "stream shorter than one window");

  std::vector<EegSegment> out;
  for (long k = 0;; ++k) {
    const long start = std::lround(static_cast<double>(k) * stride_s * stream.fs());
    if (start + len > stream.n_samples()) break;
    out.emplace_back(stream.data().middleCols(start, len), stream.fs(), stream.layout(),
                     stream.t0() + static_cast<double>(start) / stream.fs());
  }
  return out;
}

}  // namespace noir
