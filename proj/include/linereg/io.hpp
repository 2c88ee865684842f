#pragma once

#include <string>

#include "linereg/pipeline.hpp"
#include "linereg/synthetic.hpp"

namespace linereg {

/// Malformed input text. Line and column are 1-based; column 0 means the
/// whole line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class ZeroLengthSegment : public ParseError {
 public:
  using ParseError::ParseError;
};

class MissingKey : public ParseError {
 public:
  explicit MissingKey(const std::string& key)
      : ParseError("missing key '" + key + "'", 0, 0), key_(key) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class InvalidValue : public ParseError {
 public:
  using ParseError::ParseError;
};

// Segment exchange format: one comma-separated row per segment, '#' comments
// and blank lines skipped, row order defines indices.
std::vector<LineSegment2D> parse_segments_2d(const std::string& text);
std::vector<LineSegment3D> parse_segments_3d(const std::string& text);
std::string write_segments_2d(const std::vector<LineSegment2D>& segs);
std::string write_segments_3d(const std::vector<LineSegment3D>& segs);

// key=value lines: fx, fy, cx, cy, all required, unknown keys rejected.
CameraIntrinsics parse_intrinsics(const std::string& text);
std::string write_intrinsics(const CameraIntrinsics& K);

Pose parse_pose(const std::string& text);
std::string write_pose(const Pose& pose);

std::string write_pairing(const std::vector<Correspondence>& pairing);
std::vector<Correspondence> parse_pairing(const std::string& text);

/// Deterministic key-sorted report serialization; identical reports produce
/// identical bytes. Doubles carry 17 significant digits and round-trip
/// losslessly through parse_report.
std::string write_report(const RegistrationReport& report,
                         bool include_timings = true);
RegistrationReport parse_report(const std::string& text);

/// Applies `key = value` overrides to a pipeline configuration. Keys are
/// dotted (cluster.*, ransac.*, refine.*) plus `keep` and `threads`; unknown
/// keys or out-of-range values are rejected.
void apply_pipeline_overrides(const std::string& text, PipelineConfig& cfg);

SimConfig parse_sim_config(const std::string& text);

struct CampaignSpec {
  std::vector<SweepPoint> sweep;
  PipelineConfig pipeline;
  std::uint64_t master_seed = 0;
  bool with_baseline = true;
};

/// Campaign description: simulation keys define the base setting, `sweep`
/// names the swept simulation key and `values` its comma-separated settings.
CampaignSpec parse_campaign_config(const std::string& text);

}  // namespace linereg
