#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "noir/emg.hpp"
#include "noir/mi.hpp"

namespace noir {

struct CalibrationModel {
  MiDecoder mi;
  std::optional<TensionThreshold> emg;
};

/// "noir-midec v1": [decoder], [bank], [filters], [selected], [classifier],
/// optional [emg]. Filters are written with 9 significant digits (decoders
/// already hold text-quantized filters); classifier parameters round-trip
/// exactly.
void write_calibration(std::ostream& os, const MiDecoder& mi, const std::optional<TensionThreshold>& emg = {});
CalibrationModel read_calibration(std::istream& is);
void write_calibration_file(const std::string& path, const MiDecoder& mi,
                            const std::optional<TensionThreshold>& emg = {});
CalibrationModel read_calibration_file(const std::string& path);

}  // namespace noir
