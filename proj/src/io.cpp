#include "linereg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace linereg {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Line {
  std::string text;
  int number;  // 1-based
};

std::vector<Line> content_lines(const std::string& text) {
  std::vector<Line> lines;
  int number = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++number;
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line[first] != '#') {
      lines.push_back({line, number});
    }
    if (end == text.size()) break;
    pos = end + 1;
  }
  return lines;
}

double parse_double_field(const std::string& token, int line, int column) {
  const auto begin = token.find_first_not_of(" \t");
  if (begin == std::string::npos) {
    throw ParseError("empty field", line, column);
  }
  const auto last = token.find_last_not_of(" \t");
  const char* first = token.data() + begin;
  const char* end = token.data() + last + 1;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(first, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ParseError("invalid number '" + token.substr(begin, last - begin + 1) + "'",
                     line, column + static_cast<int>(begin));
  }
  return value;
}

std::vector<double> parse_row(const Line& line, size_t expected) {
  std::vector<double> values;
  std::vector<int> columns;  // 1-based start of each field
  size_t pos = 0;
  while (true) {
    size_t comma = line.text.find(',', pos);
    const std::string token =
        line.text.substr(pos, comma == std::string::npos ? std::string::npos
                                                         : comma - pos);
    columns.push_back(static_cast<int>(pos) + 1);
    if (values.size() == expected) {
      throw ParseError("expected " + std::to_string(expected) + " fields",
                       line.number, columns.back());
    }
    values.push_back(parse_double_field(token, line.number, columns.back()));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (values.size() != expected) {
    throw ParseError("expected " + std::to_string(expected) + " fields, got " +
                         std::to_string(values.size()),
                     line.number, static_cast<int>(line.text.size()) + 1);
  }
  return values;
}

struct KeyValue {
  std::string key;
  std::string value;
  int line;
};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::vector<KeyValue> parse_key_values(const std::string& text) {
  std::vector<KeyValue> kvs;
  for (const auto& line : content_lines(text)) {
    const auto eq = line.text.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected key=value", line.number, 1);
    }
    const std::string key = trim(line.text.substr(0, eq));
    const std::string value = trim(line.text.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line.number, 1);
    if (value.empty()) {
      throw ParseError("empty value for '" + key + "'", line.number,
                       static_cast<int>(eq) + 2);
    }
    kvs.push_back({key, value, line.number});
  }
  return kvs;
}

double to_double(const KeyValue& kv) {
  return parse_double_field(kv.value, kv.line, 1);
}

std::int64_t to_int(const KeyValue& kv) {
  const double v = to_double(kv);
  if (v != std::floor(v)) {
    throw InvalidValue("expected integer for '" + kv.key + "'", kv.line, 1);
  }
  return static_cast<std::int64_t>(v);
}

std::uint64_t to_seed(const KeyValue& kv) {
  std::uint64_t value = 0;
  const std::string v = trim(kv.value);
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw InvalidValue("expected unsigned integer for '" + kv.key + "'",
                       kv.line, 1);
  }
  return value;
}

std::vector<double> split_doubles(const std::string& s) {
  std::vector<double> out;
  std::istringstream stream(s);
  std::string token;
  while (stream >> token) {
    out.push_back(parse_double_field(token, 0, 0));
  }
  return out;
}

}  // namespace

std::vector<LineSegment2D> parse_segments_2d(const std::string& text) {
  std::vector<LineSegment2D> segs;
  for (const auto& line : content_lines(text)) {
    const auto v = parse_row(line, 4);
    LineSegment2D seg{{v[0], v[1]}, {v[2], v[3]}};
    if (seg.p == seg.q) {
      throw ZeroLengthSegment("segment endpoints coincide", line.number, 1);
    }
    segs.push_back(seg);
  }
  return segs;
}

std::vector<LineSegment3D> parse_segments_3d(const std::string& text) {
  std::vector<LineSegment3D> segs;
  for (const auto& line : content_lines(text)) {
    const auto v = parse_row(line, 6);
    LineSegment3D seg{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
    if (seg.p == seg.q) {
      throw ZeroLengthSegment("segment endpoints coincide", line.number, 1);
    }
    segs.push_back(seg);
  }
  return segs;
}

std::string write_segments_2d(const std::vector<LineSegment2D>& segs) {
  std::string out;
  for (const auto& s : segs) {
    out += fmt_double(s.p.x()) + "," + fmt_double(s.p.y()) + "," +
           fmt_double(s.q.x()) + "," + fmt_double(s.q.y()) + "\n";
  }
  return out;
}

std::string write_segments_3d(const std::vector<LineSegment3D>& segs) {
  std::string out;
  for (const auto& s : segs) {
    out += fmt_double(s.p.x()) + "," + fmt_double(s.p.y()) + "," +
           fmt_double(s.p.z()) + "," + fmt_double(s.q.x()) + "," +
           fmt_double(s.q.y()) + "," + fmt_double(s.q.z()) + "\n";
  }
  return out;
}

CameraIntrinsics parse_intrinsics(const std::string& text) {
  CameraIntrinsics K;
  std::set<std::string> seen;
  for (const auto& kv : parse_key_values(text)) {
    if (kv.key != "fx" && kv.key != "fy" && kv.key != "cx" && kv.key != "cy") {
      throw ParseError("unknown key '" + kv.key + "'", kv.line, 1);
    }
    if (!seen.insert(kv.key).second) {
      throw InvalidValue("duplicate key '" + kv.key + "'", kv.line, 1);
    }
    const double v = to_double(kv);
    if ((kv.key == "fx" || kv.key == "fy") && v <= 0.0) {
      throw InvalidValue("'" + kv.key + "' must be positive", kv.line, 1);
    }
    if (kv.key == "fx") K.fx = v;
    if (kv.key == "fy") K.fy = v;
    if (kv.key == "cx") K.cx = v;
    if (kv.key == "cy") K.cy = v;
  }
  for (const char* key : {"fx", "fy", "cx", "cy"}) {
    if (!seen.count(key)) throw MissingKey(key);
  }
  return K;
}

std::string write_intrinsics(const CameraIntrinsics& K) {
  return "fx=" + fmt_double(K.fx) + "\nfy=" + fmt_double(K.fy) +
         "\ncx=" + fmt_double(K.cx) + "\ncy=" + fmt_double(K.cy) + "\n";
}

Pose parse_pose(const std::string& text) {
  Pose pose;
  bool have_r = false, have_t = false;
  for (const auto& kv : parse_key_values(text)) {
    const auto values = split_doubles(kv.value);
    if (kv.key == "pose_R") {
      if (values.size() != 9) {
        throw InvalidValue("pose_R needs 9 values", kv.line, 1);
      }
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) pose.R(r, c) = values[static_cast<size_t>(3 * r + c)];
      have_r = true;
    } else if (kv.key == "pose_t") {
      if (values.size() != 3) {
        throw InvalidValue("pose_t needs 3 values", kv.line, 1);
      }
      pose.t = {values[0], values[1], values[2]};
      have_t = true;
    } else {
      throw ParseError("unknown key '" + kv.key + "'", kv.line, 1);
    }
  }
  if (!have_r) throw MissingKey("pose_R");
  if (!have_t) throw MissingKey("pose_t");
  return pose;
}

std::string write_pose(const Pose& pose) {
  std::string r = "pose_R =";
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r += " " + fmt_double(pose.R(i, j));
  std::string t = "pose_t =";
  for (int i = 0; i < 3; ++i) t += " " + fmt_double(pose.t(i));
  return r + "\n" + t + "\n";
}

std::string write_pairing(const std::vector<Correspondence>& pairing) {
  std::string out;
  for (const auto& c : pairing) {
    out += std::to_string(c.idx2d) + "," + std::to_string(c.idx3d) + "\n";
  }
  return out;
}

std::vector<Correspondence> parse_pairing(const std::string& text) {
  std::vector<Correspondence> out;
  for (const auto& line : content_lines(text)) {
    const auto v = parse_row(line, 2);
    out.push_back({static_cast<int>(v[0]), static_cast<int>(v[1])});
  }
  return out;
}

std::string write_report(const RegistrationReport& report,
                         bool include_timings) {
  // Keys emitted in sorted order so identical reports serialize identically.
  std::string out;
  out += "best_candidate = " + std::to_string(report.best_candidate) + "\n";
  out += "candidate_count = " + std::to_string(report.candidate_count) + "\n";

  auto int_list = [](const std::vector<int>& xs) {
    std::string s;
    for (const int x : xs) s += " " + std::to_string(x);
    return s;
  };
  out += "cluster_populations_2d =" + int_list(report.cluster_populations_2d) + "\n";
  out += "cluster_populations_3d =" + int_list(report.cluster_populations_3d) + "\n";

  out += "correspondences =";
  for (const auto& c : report.correspondences) {
    out += " " + std::to_string(c.idx2d) + ":" + std::to_string(c.idx3d);
  }
  out += "\n";

  std::string pose_r = "pose_R =";
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) pose_r += " " + fmt_double(report.pose.R(i, j));
  out += pose_r + "\n";
  std::string pose_t = "pose_t =";
  for (int i = 0; i < 3; ++i) pose_t += " " + fmt_double(report.pose.t(i));
  out += pose_t + "\n";

  out += "ransac_score = " + std::to_string(report.ransac_score) + "\n";
  out += "refine_converged = " + std::to_string(report.refine_converged ? 1 : 0) + "\n";
  out += "refine_cost_history =";
  for (const double c : report.refine_cost_history) out += " " + fmt_double(c);
  out += "\n";

  if (include_timings) {
    std::map<std::string, double> sorted(report.timings.begin(),
                                         report.timings.end());
    for (const auto& [stage, seconds] : sorted) {
      out += "timing_" + stage + " = " + fmt_double(seconds) + "\n";
    }
  }
  return out;
}

RegistrationReport parse_report(const std::string& text) {
  RegistrationReport report;
  for (const auto& kv : parse_key_values(text)) {
    if (kv.key == "best_candidate") {
      report.best_candidate = static_cast<int>(to_int(kv));
    } else if (kv.key == "candidate_count") {
      report.candidate_count = static_cast<int>(to_int(kv));
    } else if (kv.key == "cluster_populations_2d" ||
               kv.key == "cluster_populations_3d") {
      auto& dst = kv.key == "cluster_populations_2d"
                      ? report.cluster_populations_2d
                      : report.cluster_populations_3d;
      for (const double v : split_doubles(kv.value)) {
        dst.push_back(static_cast<int>(v));
      }
    } else if (kv.key == "correspondences") {
      std::istringstream stream(kv.value);
      std::string token;
      while (stream >> token) {
        const auto colon = token.find(':');
        if (colon == std::string::npos) {
          throw InvalidValue("expected idx2d:idx3d pair", kv.line, 1);
        }
        report.correspondences.push_back(
            {std::stoi(token.substr(0, colon)), std::stoi(token.substr(colon + 1))});
      }
    } else if (kv.key == "pose_R") {
      const auto v = split_doubles(kv.value);
      if (v.size() != 9) throw InvalidValue("pose_R needs 9 values", kv.line, 1);
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) report.pose.R(r, c) = v[static_cast<size_t>(3 * r + c)];
    } else if (kv.key == "pose_t") {
      const auto v = split_doubles(kv.value);
      if (v.size() != 3) throw InvalidValue("pose_t needs 3 values", kv.line, 1);
      report.pose.t = {v[0], v[1], v[2]};
    } else if (kv.key == "ransac_score") {
      report.ransac_score = static_cast<int>(to_int(kv));
    } else if (kv.key == "refine_converged") {
      report.refine_converged = to_int(kv) != 0;
    } else if (kv.key == "refine_cost_history") {
      report.refine_cost_history = split_doubles(kv.value);
    } else if (kv.key.rfind("timing_", 0) == 0) {
      report.timings.emplace_back(kv.key.substr(7), to_double(kv));
    } else {
      throw ParseError("unknown key '" + kv.key + "'", kv.line, 1);
    }
  }
  return report;
}

namespace {

// "correspondences =" and similar keys parse to empty lists; every other
// value is scalar. Shared guard for positive values.
void require(bool ok, const KeyValue& kv, const char* what) {
  if (!ok) {
    throw InvalidValue("'" + kv.key + "' " + what, kv.line, 1);
  }
}

bool apply_pipeline_key(const KeyValue& kv, PipelineConfig& cfg) {
  if (kv.key == "cluster.num_clusters") {
    const auto v = to_int(kv);
    require(v > 3, kv, "must be greater than 3");
    cfg.cluster.num_clusters = static_cast<int>(v);
  } else if (kv.key == "cluster.inlier_angle_2d") {
    const double v = to_double(kv);
    require(v > 0.0 && v < 90.0, kv, "must be in (0, 90)");
    cfg.cluster.inlier_angle_2d_deg = v;
  } else if (kv.key == "cluster.inlier_angle_3d") {
    const double v = to_double(kv);
    require(v > 0.0 && v < 90.0, kv, "must be in (0, 90)");
    cfg.cluster.inlier_angle_3d_deg = v;
  } else if (kv.key == "cluster.merge_angle") {
    const double v = to_double(kv);
    require(v > 0.0 && v < 90.0, kv, "must be in (0, 90)");
    cfg.cluster.merge_angle_deg = v;
  } else if (kv.key == "cluster.ransac_iters") {
    const auto v = to_int(kv);
    require(v >= 1, kv, "must be at least 1");
    cfg.cluster.ransac_iters = static_cast<int>(v);
  } else if (kv.key == "ransac.max_iters") {
    const auto v = to_int(kv);
    require(v >= 1, kv, "must be at least 1");
    cfg.ransac.max_iters = static_cast<int>(v);
  } else if (kv.key == "ransac.overlap_fraction") {
    const double v = to_double(kv);
    require(v > 0.0 && v <= 1.0, kv, "must be in (0, 1]");
    cfg.ransac.overlap_fraction = v;
  } else if (kv.key == "ransac.early_exit_fraction") {
    const double v = to_double(kv);
    require(v > 0.0 && v <= 1.0, kv, "must be in (0, 1]");
    cfg.ransac.early_exit_fraction = v;
  } else if (kv.key == "ransac.coplanarity_angle") {
    const double v = to_double(kv);
    require(v > 0.0 && v < 90.0, kv, "must be in (0, 90)");
    cfg.ransac.coplanarity_angle_deg = v;
  } else if (kv.key == "ransac.min_2d_length") {
    const double v = to_double(kv);
    require(v >= 0.0, kv, "must be non-negative");
    cfg.ransac.min_2d_length_px = v;
  } else if (kv.key == "ransac.min_3d_length") {
    cfg.ransac.min_3d_length = to_double(kv);
  } else if (kv.key == "refine.max_lm_iters") {
    const auto v = to_int(kv);
    require(v >= 1, kv, "must be at least 1");
    cfg.refine.max_lm_iters = static_cast<int>(v);
  } else if (kv.key == "refine.max_outlier_rounds") {
    const auto v = to_int(kv);
    require(v >= 1, kv, "must be at least 1");
    cfg.refine.max_outlier_rounds = static_cast<int>(v);
  } else if (kv.key == "refine.outlier_px") {
    const double v = to_double(kv);
    require(v > 0.0, kv, "must be positive");
    cfg.refine.outlier_px = v;
  } else if (kv.key == "refine.lm_init_damping") {
    const double v = to_double(kv);
    require(v > 0.0, kv, "must be positive");
    cfg.refine.lm_init_damping = v;
  } else if (kv.key == "refine.convergence_tol") {
    const double v = to_double(kv);
    require(v > 0.0, kv, "must be positive");
    cfg.refine.convergence_tol = v;
  } else if (kv.key == "keep") {
    const auto v = to_int(kv);
    require(v >= 2 && v <= 3, kv, "must be 2 or 3");
    cfg.keep = static_cast<int>(v);
  } else if (kv.key == "threads") {
    const auto v = to_int(kv);
    require(v >= 0, kv, "must be non-negative");
    cfg.n_threads = static_cast<int>(v);
  } else {
    return false;
  }
  return true;
}

bool apply_sim_key(const KeyValue& kv, SimConfig& cfg) {
  if (kv.key == "n_lines") {
    const auto v = to_int(kv);
    require(v >= 10, kv, "must be at least 10");
    cfg.n_lines = static_cast<int>(v);
  } else if (kv.key == "n_families") {
    const auto v = to_int(kv);
    require(v >= 2, kv, "must be at least 2");
    cfg.n_families = static_cast<int>(v);
  } else if (kv.key == "outlier_frac_3d" || kv.key == "outlier_frac_2d" ||
             kv.key == "occlusion_frac") {
    const double v = to_double(kv);
    require(v >= 0.0 && v < 1.0, kv, "must be in [0, 1)");
    if (kv.key == "outlier_frac_3d") cfg.outlier_frac_3d = v;
    if (kv.key == "outlier_frac_2d") cfg.outlier_frac_2d = v;
    if (kv.key == "occlusion_frac") cfg.occlusion_frac = v;
  } else if (kv.key == "noise_sigma") {
    const double v = to_double(kv);
    require(v >= 0.0, kv, "must be non-negative");
    cfg.noise_sigma = v;
  } else if (kv.key == "image_w" || kv.key == "image_h") {
    const auto v = to_int(kv);
    require(v > 0, kv, "must be positive");
    if (kv.key == "image_w") cfg.image_w = static_cast<int>(v);
    if (kv.key == "image_h") cfg.image_h = static_cast<int>(v);
  } else if (kv.key == "f") {
    const double v = to_double(kv);
    require(v > 0.0, kv, "must be positive");
    cfg.f = v;
  } else if (kv.key == "scene_box") {
    const double v = to_double(kv);
    require(v > 0.0, kv, "must be positive");
    cfg.scene_box = v;
  } else if (kv.key == "n_trials") {
    const auto v = to_int(kv);
    require(v >= 1, kv, "must be at least 1");
    cfg.n_trials = static_cast<int>(v);
  } else if (kv.key == "seed") {
    cfg.rng_seed = to_seed(kv);
  } else {
    return false;
  }
  return true;
}

}  // namespace

void apply_pipeline_overrides(const std::string& text, PipelineConfig& cfg) {
  for (const auto& kv : parse_key_values(text)) {
    if (!apply_pipeline_key(kv, cfg)) {
      throw ParseError("unknown key '" + kv.key + "'", kv.line, 1);
    }
  }
}

SimConfig parse_sim_config(const std::string& text) {
  SimConfig cfg;
  for (const auto& kv : parse_key_values(text)) {
    if (!apply_sim_key(kv, cfg)) {
      throw ParseError("unknown key '" + kv.key + "'", kv.line, 1);
    }
  }
  return cfg;
}

CampaignSpec parse_campaign_config(const std::string& text) {
  CampaignSpec spec;
  SimConfig base;
  std::string sweep_key;
  std::vector<std::string> sweep_values;

  for (const auto& kv : parse_key_values(text)) {
    if (kv.key == "sweep") {
      sweep_key = kv.value;
    } else if (kv.key == "values") {
      std::string token;
      std::istringstream stream(kv.value);
      while (std::getline(stream, token, ',')) {
        token = trim(token);
        if (!token.empty()) sweep_values.push_back(token);
      }
    } else if (kv.key == "baseline") {
      spec.with_baseline = to_int(kv) != 0;
    } else if (apply_sim_key(kv, base) || apply_pipeline_key(kv, spec.pipeline)) {
      // handled
    } else {
      throw ParseError("unknown key '" + kv.key + "'", kv.line, 1);
    }
  }

  spec.master_seed = base.rng_seed;
  if (sweep_key.empty()) {
    spec.sweep.push_back({"all", base});
    return spec;
  }
  if (sweep_values.empty()) {
    throw MissingKey("values");
  }
  for (const auto& value : sweep_values) {
    SimConfig point = base;
    if (!apply_sim_key({sweep_key, value, 0}, point)) {
      throw ParseError("unknown sweep key '" + sweep_key + "'", 0, 0);
    }
    spec.sweep.push_back({value, point});
  }
  return spec;
}

}  // namespace linereg
