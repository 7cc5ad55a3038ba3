#include "noir/eeg_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "noir/text.hpp"

namespace noir {

std::optional<std::string> EegRecording::get(const std::string& key) const {
  auto it = extra.find(key);
  if (it == extra.end()) return std::nullopt;
  return it->second;
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9e", v);
  return buf;
}

void write_eeg(std::ostream& os, const EegSegment& segment, const std::map<std::string, std::string>& extra) {
  os << "# version: noir-eeg v1\n";
  os << "# fs: " << format_value(segment.fs()) << "\n";
  os << "# t0: " << format_value(segment.t0()) << "\n";
  os << "# channels: ";
  const auto& chans = segment.layout().channels();
  for (std::size_t i = 0; i < chans.size(); ++i) {
    if (i) os << ',';
    os << chans[i].name << ':' << to_string(chans[i].region);
  }
  os << "\n";
  for (const auto& [k, v] : extra) os << "# " << k << ": " << v << "\n";
  const auto& d = segment.data();
  for (Eigen::Index s = 0; s < d.cols(); ++s) {
    for (Eigen::Index c = 0; c < d.rows(); ++c) {
      if (c) os << ',';
      os << format_value(d(c, s));
    }
    os << "\n";
  }
}

EegRecording read_eeg(std::istream& is) {
  std::string line;
  std::map<std::string, std::string> header;
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    line = text::trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto body = text::trim(line.substr(1));
      const auto colon = body.find(':');
      if (colon == std::string::npos) fail(ErrorCode::ParseError, "header line without ':' : " + line);
      header[text::trim(body.substr(0, colon))] = text::trim(body.substr(colon + 1));
      continue;
    }
    std::vector<double> row;
    for (const auto& tok : text::split(line, ',')) row.push_back(text::parse_double(tok));
    rows.push_back(std::move(row));
  }
  if (header["version"] != "noir-eeg v1") fail(ErrorCode::ParseError, "not a noir-eeg v1 recording");
  if (!header.count("fs") || !header.count("channels")) fail(ErrorCode::ParseError, "missing fs or channels header");

  std::vector<Channel> chans;
  for (const auto& pair : text::split(header["channels"], ',')) {
    const auto colon = pair.find(':');
    if (colon == std::string::npos) fail(ErrorCode::ParseError, "channel entry must be name:region");
    chans.push_back({text::trim(pair.substr(0, colon)), region_from_string(text::trim(pair.substr(colon + 1)))});
  }
  if (rows.empty()) fail(ErrorCode::ParseError, "recording has no samples");
  Eigen::MatrixXd data(static_cast<Eigen::Index>(chans.size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t s = 0; s < rows.size(); ++s) {
    if (rows[s].size() != chans.size()) fail(ErrorCode::ParseError, "row width does not match channel count");
    for (std::size_t c = 0; c < chans.size(); ++c) data(c, s) = rows[s][c];
  }
  const double fs = text::parse_double(header["fs"]);
  const double t0 = header.count("t0") ? text::parse_double(header["t0"]) : 0.0;

  std::map<std::string, std::string> extra;
  for (const auto& [k, v] : header) {
    if (k != "version" && k != "fs" && k != "t0" && k != "channels") extra[k] = v;
  }
  return {EegSegment(std::move(data), fs, ChannelLayout(std::move(chans)), t0), std::move(extra)};
}

void write_eeg_file(const std::string& path, const EegSegment& segment, const std::map<std::string, std::string>& extra) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::InvalidArgument, "cannot write " + path);
  write_eeg(os, segment, extra);
}

EegRecording read_eeg_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::InvalidArgument, "cannot open " + path);
  return read_eeg(is);
}

}  // namespace noir
