#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "noir/error.hpp"

namespace noir {

enum class Region { Visual, MotorLeft, MotorRight, Frontal, Other };

std::string_view to_string(Region r);
Region region_from_string(std::string_view s);

struct Channel {
  std::string name;
  Region region = Region::Other;

  bool operator==(const Channel&) const = default;
};

/// Ordered channel list with anatomical region tags. Names are unique and the
/// list is never empty.
class ChannelLayout {
 public:
  ChannelLayout() = default;
  explicit ChannelLayout(std::vector<Channel> channels);

  std::size_t size() const { return channels_.size(); }
  const Channel& operator[](std::size_t i) const { return channels_[i]; }
  const std::vector<Channel>& channels() const { return channels_; }

  /// Row indices of channels tagged with any of the given regions, in layout order.
  std::vector<int> indices(std::initializer_list<Region> regions) const;
  ChannelLayout subset(const std::vector<int>& rows) const;

  bool operator==(const ChannelLayout&) const = default;

  /// 16 channels: 4 Visual, 4 MotorLeft, 4 MotorRight, 4 Frontal.
  static ChannelLayout standard16();

 private:
  std::vector<Channel> channels_;
};

/// channels x samples block of EEG with its sampling rate and start time.
class EegSegment {
 public:
  EegSegment(Eigen::MatrixXd data, double fs, ChannelLayout layout, double t0 = 0.0);

  const Eigen::MatrixXd& data() const { return data_; }
  double fs() const { return fs_; }
  const ChannelLayout& layout() const { return layout_; }
  double t0() const { return t0_; }

  int n_channels() const { return static_cast<int>(data_.rows()); }
  int n_samples() const { return static_cast<int>(data_.cols()); }
  double duration() const { return n_samples() / fs_; }

  /// Rows belonging to the given regions; throws `missing` when none match.
  EegSegment select(std::initializer_list<Region> regions, ErrorCode missing) const;
  EegSegment with_data(Eigen::MatrixXd data) const;

 private:
  Eigen::MatrixXd data_;
  double fs_;
  ChannelLayout layout_;
  double t0_;
};

/// Fixed-length windows advancing by `stride_s`; each window has exactly
/// round(length_s * fs) samples.
std::vector<EegSegment> window_segments(const EegSegment& stream, double length_s, double stride_s);

}  // namespace noir
