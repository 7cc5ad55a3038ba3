#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "noir/signal.hpp"

namespace noir {

/// A recording read from "noir-eeg v1" text plus any extra `# key: value`
/// header pairs (e.g. `label`) that are not part of the core header.
struct EegRecording {
  EegSegment segment;
  std::map<std::string, std::string> extra;

  std::optional<std::string> get(const std::string& key) const;
};

/// Header lines `# version`, `# fs`, `# t0`, `# channels` (name:Region pairs),
/// then one comma-separated sample row per line, values in %.9e.
void write_eeg(std::ostream& os, const EegSegment& segment, const std::map<std::string, std::string>& extra = {});
EegRecording read_eeg(std::istream& is);

void write_eeg_file(const std::string& path, const EegSegment& segment,
                    const std::map<std::string, std::string>& extra = {});
EegRecording read_eeg_file(const std::string& path);

/// printf-style "%.9e" formatting shared by the text formats.
std::string format_value(double v);

}  // namespace noir
