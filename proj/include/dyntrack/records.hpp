#pragma once

#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dyntrack/config.hpp"
#include "dyntrack/io.hpp"
#include "dyntrack/metrics.hpp"
#include "dyntrack/simulation.hpp"
#include "dyntrack/tracker.hpp"

// On-disk formats.
//
// Scenario file (JSON lines). Line 1 is the header
//   {"kind":"scenario","version":1,"config":{<key>:<value>,...},"frame_count":N}
// where config holds the full key-value scenario config. Each further line is
// one frame:
//   {"index":i,"timestamp":t,
//    "vio_delta":{"from":"camera@i-1","to":"camera@i","q":[w,x,y,z],"t":[x,y,z]},
//    "bbox":[u,v,w,h] | null,"median_depth":z | null,
//    "truth":{"object_world":P,"camera_world":P,"object_cam":P}}
//
// Result log (JSON lines), one record per frame in this field order:
//   frame_index, timestamp, q, t, candidate_count, translation_source,
//   sigma, update_magnitudes
//
// Metrics CSV: header "frame_index,add_m,adds_m", one row per frame.
//
// Metrics report JSON: object, headline_metric, auc_add, auc_adds,
// success_rate, diameter, symmetric, frames, config_digest, seed.

namespace dyntrack {

using ordered_json = nlohmann::ordered_json;

namespace detail {

inline ordered_json vec_json(const Vec3& v) { return ordered_json::array({v.x(), v.y(), v.z()}); }

inline ordered_json quat_json(const Rotation& r) {
  const auto& q = r.quaternion();
  return ordered_json::array({q.w(), q.x(), q.y(), q.z()});
}

inline Vec3 json_vec(const ordered_json& j) {
  if (!j.is_array() || j.size() != 3) throw ParseError("expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline Rotation json_quat(const ordered_json& j) {
  if (!j.is_array() || j.size() != 4) throw ParseError("expected a 4-element quaternion");
  return Rotation::from_quaternion(
      Eigen::Quaterniond(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()));
}

inline FrameLabel parse_label(const std::string& s) {
  const auto at = s.rfind('@');
  if (at == std::string::npos) return FrameLabel(s);
  return FrameLabel(s.substr(0, at), std::stoll(s.substr(at + 1)));
}

inline ordered_json pose_json(const Pose& p) {
  ordered_json j;
  j["from"] = p.from.str();
  j["to"] = p.to.str();
  j["q"] = quat_json(p.rotation);
  j["t"] = vec_json(p.translation);
  return j;
}

inline Pose json_pose(const ordered_json& j) {
  return Pose(json_quat(j.at("q")), json_vec(j.at("t")), parse_label(j.at("from").get<std::string>()),
              parse_label(j.at("to").get<std::string>()));
}

inline ordered_json kv_json(const KeyValueConfig& kv) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : kv.values()) j[k] = v;
  return j;
}

}  // namespace detail

// Scenario ---------------------------------------------------------------------

inline std::string serialize_scenario(const Scenario& s) {
  std::string out;
  ordered_json header;
  header["kind"] = "scenario";
  header["version"] = 1;
  header["config"] = detail::kv_json(scenario_to_kv(s.config));
  header["frame_count"] = s.frames.size();
  out += header.dump() + "\n";
  for (const auto& f : s.frames) {
    ordered_json j;
    j["index"] = f.index;
    j["timestamp"] = f.timestamp;
    j["vio_delta"] = detail::pose_json(f.vio_delta);
    if (f.observation) {
      const auto& b = f.observation->box;
      j["bbox"] = ordered_json::array({b.u, b.v, b.w, b.h});
      j["median_depth"] = f.observation->median_depth;
    } else {
      j["bbox"] = nullptr;
      j["median_depth"] = nullptr;
    }
    if (const GroundTruth* t = oracle::find_truth(f)) {
      ordered_json truth;
      truth["object_world"] = detail::pose_json(t->object_world);
      truth["camera_world"] = detail::pose_json(t->camera_world);
      truth["object_cam"] = detail::pose_json(t->object_cam);
      j["truth"] = std::move(truth);
    } else {
      j["truth"] = nullptr;
    }
    out += j.dump() + "\n";
  }
  return out;
}

inline Scenario parse_scenario(const std::string& text, const std::string& source = "<scenario>") {
  std::istringstream in(text);
  std::string line;
  Scenario s;
  int lineno = 0;
  std::size_t expected = 0;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto j = ordered_json::parse(line);
      if (lineno == 1) {
        if (j.value("kind", "") != "scenario") throw ParseError("missing scenario header");
        KeyValueConfig kv;
        for (const auto& [k, v] : j.at("config").items()) kv.set(k, v.get<std::string>());
        s.config = scenario_from_kv(kv);
        expected = j.at("frame_count").get<std::size_t>();
        continue;
      }
      SensorFrame f;
      f.index = j.at("index").get<std::int64_t>();
      f.timestamp = j.at("timestamp").get<double>();
      f.vio_delta = detail::json_pose(j.at("vio_delta"));
      if (!j.at("bbox").is_null()) {
        const auto& b = j.at("bbox");
        f.observation = BoxObservation{{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                                        b.at(3).get<double>()},
                                       j.at("median_depth").get<double>()};
      }
      if (!j.at("truth").is_null()) {
        const auto& t = j.at("truth");
        oracle::attach_truth(f, GroundTruth{detail::json_pose(t.at("object_world")),
                                            detail::json_pose(t.at("camera_world")),
                                            detail::json_pose(t.at("object_cam"))});
      }
      s.frames.push_back(std::move(f));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source + ":" + std::to_string(lineno) + ": " + e.what());
  }
  if (lineno == 0) throw ParseError(source + ": empty scenario file");
  if (s.frames.size() != expected) {
    throw ParseError(source + ": header announces " + std::to_string(expected) + " frames, found " +
                     std::to_string(s.frames.size()));
  }
  return s;
}

inline void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_scenario(s));
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_file(path), path.string());
}

// Tracking results -------------------------------------------------------------

inline std::string serialize_results(const std::vector<TrackResult>& results) {
  std::string out;
  for (const auto& r : results) {
    ordered_json j;
    j["frame_index"] = r.frame_index;
    j["timestamp"] = r.timestamp;
    j["q"] = detail::quat_json(r.pose_cam.rotation);
    j["t"] = detail::vec_json(r.pose_cam.translation);
    j["candidate_count"] = r.candidate_count;
    j["translation_source"] = to_string(r.translation_source);
    j["sigma"] = detail::vec_json(r.sigma);
    j["update_magnitudes"] = r.update_magnitudes;
    out += j.dump() + "\n";
  }
  return out;
}

// Metrics ----------------------------------------------------------------------

struct MetricsRow {
  std::int64_t frame_index = 0;
  double add_m = 0.0;
  double adds_m = 0.0;
};

inline constexpr const char* kMetricsCsvHeader = "frame_index,add_m,adds_m";

inline std::vector<MetricsRow> metrics_rows(const MetricsReport& r, const std::vector<std::int64_t>& frame_indices) {
  if (frame_indices.size() != r.per_frame_add.size()) {
    throw LengthMismatch("metrics_rows: frame index count differs from report length");
  }
  std::vector<MetricsRow> rows;
  for (std::size_t i = 0; i < frame_indices.size(); ++i) {
    rows.push_back({frame_indices[i], r.per_frame_add[i], r.per_frame_adds[i]});
  }
  return rows;
}

inline std::string format_metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out = std::string(kMetricsCsvHeader) + "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.frame_index) + "," + format_double(r.add_m) + "," + format_double(r.adds_m) + "\n";
  }
  return out;
}

inline std::vector<MetricsRow> parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || KeyValueConfig::trim(line) != kMetricsCsvHeader) {
    throw ParseError("metrics csv: missing header '" + std::string(kMetricsCsvHeader) + "'");
  }
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (KeyValueConfig::trim(line).empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) throw ParseError("metrics csv: bad row '" + line + "'");
    MetricsRow r;
    const double idx = parse_double(line.substr(0, c1), "frame_index");
    r.frame_index = static_cast<std::int64_t>(idx);
    if (static_cast<double>(r.frame_index) != idx) throw ParseError("metrics csv: non-integer frame index");
    r.add_m = parse_double(line.substr(c1 + 1, c2 - c1 - 1), "add_m");
    r.adds_m = parse_double(line.substr(c2 + 1), "adds_m");
    rows.push_back(r);
  }
  return rows;
}

inline std::string format_report_json(const MetricsReport& r, const std::string& config_digest, std::uint64_t seed) {
  ordered_json j;
  j["object"] = r.object;
  j["headline_metric"] = r.headline_metric();
  j["auc_add"] = r.auc_add;
  j["auc_adds"] = r.auc_adds;
  j["success_rate"] = r.success_rate;
  j["diameter"] = r.diameter;
  j["symmetric"] = r.symmetric;
  j["frames"] = r.per_frame_add.size();
  j["config_digest"] = config_digest;
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

}  // namespace dyntrack
