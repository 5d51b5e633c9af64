#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dyntrack/io.hpp"
#include "dyntrack/refine.hpp"
#include "dyntrack/simulation.hpp"
#include "dyntrack/tracker.hpp"

namespace dyntrack {

// Scenario ------------------------------------------------------------------

namespace detail {

inline const std::vector<std::string>& trajectory_fields() {
  static const std::vector<std::string> f = {
      "kind",          "position",          "orientation", "linear_velocity",       "angular_velocity",
      "linear_frequency", "angular_frequency", "step_time", "linear_velocity_after", "angular_velocity_after",
      "waypoints",     "duration"};
  return f;
}

inline void read_trajectory(const KeyValueConfig& kv, const std::string& p, TrajectorySpec& t) {
  t.kind = trajectory_kind_from_string(kv.get_string(p + ".kind", to_string(t.kind)));
  t.initial_position = kv.get_vec3(p + ".position", t.initial_position);
  t.initial_orientation = TaitBryan(kv.get_vec3(p + ".orientation", t.initial_orientation.vec()));
  t.linear_velocity = kv.get_vec3(p + ".linear_velocity", t.linear_velocity);
  t.angular_velocity = kv.get_vec3(p + ".angular_velocity", t.angular_velocity);
  t.linear_frequency = kv.get_double(p + ".linear_frequency", t.linear_frequency);
  t.angular_frequency = kv.get_double(p + ".angular_frequency", t.angular_frequency);
  t.step_time = kv.get_double(p + ".step_time", t.step_time);
  t.linear_velocity_after = kv.get_vec3(p + ".linear_velocity_after", t.linear_velocity_after);
  t.angular_velocity_after = kv.get_vec3(p + ".angular_velocity_after", t.angular_velocity_after);
  t.duration = kv.get_double(p + ".duration", t.duration);
  if (kv.has(p + ".waypoints")) {
    const auto nums = kv.get_numbers(p + ".waypoints");
    if (nums.size() % 3 != 0) throw ParseError(p + ".waypoints: expected x y z triples");
    t.waypoints.clear();
    for (std::size_t i = 0; i < nums.size(); i += 3) t.waypoints.emplace_back(nums[i], nums[i + 1], nums[i + 2]);
  }
}

inline void write_trajectory(KeyValueConfig& kv, const std::string& p, const TrajectorySpec& t) {
  kv.set(p + ".kind", to_string(t.kind));
  kv.set(p + ".position", format_vec3(t.initial_position));
  kv.set(p + ".orientation", format_vec3(t.initial_orientation.vec()));
  kv.set(p + ".linear_velocity", format_vec3(t.linear_velocity));
  kv.set(p + ".angular_velocity", format_vec3(t.angular_velocity));
  kv.set(p + ".linear_frequency", format_double(t.linear_frequency));
  kv.set(p + ".angular_frequency", format_double(t.angular_frequency));
  kv.set(p + ".step_time", format_double(t.step_time));
  kv.set(p + ".linear_velocity_after", format_vec3(t.linear_velocity_after));
  kv.set(p + ".angular_velocity_after", format_vec3(t.angular_velocity_after));
  kv.set(p + ".duration", format_double(t.duration));
  std::string wp;
  for (const auto& w : t.waypoints) wp += (wp.empty() ? "" : "; ") + format_vec3(w);
  if (!wp.empty()) kv.set(p + ".waypoints", wp);
}

inline std::vector<std::string> scenario_keys() {
  std::vector<std::string> keys = {
      "scenario.preset",       "scenario.frame_rate",     "scenario.seed",         "scenario.object_model",
      "scenario.model_points", "scenario.duration",       "intrinsics.fx",         "intrinsics.fy",
      "intrinsics.cx",         "intrinsics.cy",           "intrinsics.width",      "intrinsics.height",
      "noise.vio_rot_sigma",   "noise.vio_trans_sigma",   "noise.vio_trans_bias",  "noise.bbox_pixel_sigma",
      "noise.depth_sigma",     "noise.depth_bias",        "noise.dropout_prob"};
  for (const auto& f : trajectory_fields()) {
    keys.push_back("object." + f);
    keys.push_back("camera." + f);
  }
  return keys;
}

}  // namespace detail

/// Builds a scenario config; `scenario.preset` (if present) supplies the base
/// values and every other key overrides it.
inline ScenarioConfig scenario_from_kv(const KeyValueConfig& kv) {
  kv.require_known(detail::scenario_keys());
  ScenarioConfig c = kv.has("scenario.preset") ? scenario_preset(kv.get_string("scenario.preset", "")) : ScenarioConfig{};
  if (kv.has("scenario.duration")) {
    c.object_trajectory.duration = c.camera_trajectory.duration = kv.get_double("scenario.duration", 1.0);
  }
  detail::read_trajectory(kv, "object", c.object_trajectory);
  detail::read_trajectory(kv, "camera", c.camera_trajectory);
  c.frame_rate = kv.get_double("scenario.frame_rate", c.frame_rate);
  c.seed = kv.get_u64("scenario.seed", c.seed);
  c.object_model_id = kv.get_string("scenario.object_model", c.object_model_id);
  c.model_points = static_cast<std::size_t>(kv.get_int("scenario.model_points", static_cast<std::int64_t>(c.model_points)));
  auto& k = c.intrinsics;
  k.fx = kv.get_double("intrinsics.fx", k.fx);
  k.fy = kv.get_double("intrinsics.fy", k.fy);
  k.cx = kv.get_double("intrinsics.cx", k.cx);
  k.cy = kv.get_double("intrinsics.cy", k.cy);
  k.width = static_cast<int>(kv.get_int("intrinsics.width", k.width));
  k.height = static_cast<int>(kv.get_int("intrinsics.height", k.height));
  auto& n = c.noise;
  n.vio_rot_sigma = kv.get_double("noise.vio_rot_sigma", n.vio_rot_sigma);
  n.vio_trans_sigma = kv.get_double("noise.vio_trans_sigma", n.vio_trans_sigma);
  n.vio_trans_bias = kv.get_vec3("noise.vio_trans_bias", n.vio_trans_bias);
  n.bbox_pixel_sigma = kv.get_double("noise.bbox_pixel_sigma", n.bbox_pixel_sigma);
  n.depth_sigma = kv.get_double("noise.depth_sigma", n.depth_sigma);
  n.depth_bias = kv.get_double("noise.depth_bias", n.depth_bias);
  n.dropout_prob = kv.get_double("noise.dropout_prob", n.dropout_prob);
  c.validate();
  return c;
}

inline KeyValueConfig scenario_to_kv(const ScenarioConfig& c) {
  KeyValueConfig kv;
  kv.set("scenario.frame_rate", format_double(c.frame_rate));
  kv.set("scenario.seed", std::to_string(c.seed));
  kv.set("scenario.object_model", c.object_model_id);
  kv.set("scenario.model_points", std::to_string(c.model_points));
  kv.set("intrinsics.fx", format_double(c.intrinsics.fx));
  kv.set("intrinsics.fy", format_double(c.intrinsics.fy));
  kv.set("intrinsics.cx", format_double(c.intrinsics.cx));
  kv.set("intrinsics.cy", format_double(c.intrinsics.cy));
  kv.set("intrinsics.width", std::to_string(c.intrinsics.width));
  kv.set("intrinsics.height", std::to_string(c.intrinsics.height));
  kv.set("noise.vio_rot_sigma", format_double(c.noise.vio_rot_sigma));
  kv.set("noise.vio_trans_sigma", format_double(c.noise.vio_trans_sigma));
  kv.set("noise.vio_trans_bias", format_vec3(c.noise.vio_trans_bias));
  kv.set("noise.bbox_pixel_sigma", format_double(c.noise.bbox_pixel_sigma));
  kv.set("noise.depth_sigma", format_double(c.noise.depth_sigma));
  kv.set("noise.depth_bias", format_double(c.noise.depth_bias));
  kv.set("noise.dropout_prob", format_double(c.noise.dropout_prob));
  detail::write_trajectory(kv, "object", c.object_trajectory);
  detail::write_trajectory(kv, "camera", c.camera_trajectory);
  return kv;
}

// Tracker -------------------------------------------------------------------

inline TrackerConfig tracker_from_kv(const KeyValueConfig& kv) {
  kv.require_known({"filter.measurement_variance", "filter.q_floor", "filter.q_scale", "filter.initial_variance",
                    "sampler.sigma_threshold", "schedule.k_sequence", "tracker.bbox_gate",
                    "ablation.disable_translation_compensation", "ablation.disable_rotation_estimation"});
  TrackerConfig c;
  auto& f = c.filter_noise;
  f.measurement_variance = kv.get_double("filter.measurement_variance", f.measurement_variance);
  f.q_floor = kv.get_double("filter.q_floor", f.q_floor);
  f.q_scale = kv.get_double("filter.q_scale", f.q_scale);
  f.initial_variance = kv.get_double("filter.initial_variance", f.initial_variance);
  c.sampler.sigma_threshold = kv.get_double("sampler.sigma_threshold", c.sampler.sigma_threshold);
  if (kv.has("schedule.k_sequence")) {
    c.schedule.k_sequence.clear();
    for (double v : kv.get_numbers("schedule.k_sequence")) {
      if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v))) {
        throw ParseError("schedule.k_sequence: expected positive integers");
      }
      c.schedule.k_sequence.push_back(static_cast<std::size_t>(v));
    }
  }
  c.bbox_gate = kv.get_double("tracker.bbox_gate", c.bbox_gate);
  c.ablation.disable_translation_compensation =
      kv.get_bool("ablation.disable_translation_compensation", c.ablation.disable_translation_compensation);
  c.ablation.disable_rotation_estimation =
      kv.get_bool("ablation.disable_rotation_estimation", c.ablation.disable_rotation_estimation);
  c.validate();
  return c;
}

inline KeyValueConfig tracker_to_kv(const TrackerConfig& c) {
  KeyValueConfig kv;
  kv.set("filter.measurement_variance", format_double(c.filter_noise.measurement_variance));
  kv.set("filter.q_floor", format_double(c.filter_noise.q_floor));
  kv.set("filter.q_scale", format_double(c.filter_noise.q_scale));
  kv.set("filter.initial_variance", format_double(c.filter_noise.initial_variance));
  kv.set("sampler.sigma_threshold", format_double(c.sampler.sigma_threshold));
  std::string ks;
  for (auto k : c.schedule.k_sequence) ks += (ks.empty() ? "" : " ") + std::to_string(k);
  kv.set("schedule.k_sequence", ks);
  kv.set("tracker.bbox_gate", format_double(c.bbox_gate));
  kv.set("ablation.disable_translation_compensation", c.ablation.disable_translation_compensation ? "true" : "false");
  kv.set("ablation.disable_rotation_estimation", c.ablation.disable_rotation_estimation ? "true" : "false");
  return kv;
}

// Refiner -------------------------------------------------------------------

inline BasinRefinerConfig refiner_from_kv(const KeyValueConfig& kv) {
  kv.require_known({"refiner.basin_angle", "refiner.basin_translation", "refiner.gain", "refiner.residual_rot_noise",
                    "refiner.residual_trans_noise", "refiner.wander_angle", "refiner.wander_translation",
                    "refiner.seed"});
  BasinRefinerConfig c;
  c.basin_angle = kv.get_double("refiner.basin_angle", c.basin_angle);
  c.basin_translation = kv.get_double("refiner.basin_translation", c.basin_translation);
  c.gain = kv.get_double("refiner.gain", c.gain);
  c.residual_rot_noise = kv.get_double("refiner.residual_rot_noise", c.residual_rot_noise);
  c.residual_trans_noise = kv.get_double("refiner.residual_trans_noise", c.residual_trans_noise);
  c.wander_angle = kv.get_double("refiner.wander_angle", c.wander_angle);
  c.wander_translation = kv.get_double("refiner.wander_translation", c.wander_translation);
  c.seed = kv.get_u64("refiner.seed", c.seed);
  c.validate();
  return c;
}

inline KeyValueConfig refiner_to_kv(const BasinRefinerConfig& c) {
  KeyValueConfig kv;
  kv.set("refiner.basin_angle", format_double(c.basin_angle));
  kv.set("refiner.basin_translation", format_double(c.basin_translation));
  kv.set("refiner.gain", format_double(c.gain));
  kv.set("refiner.residual_rot_noise", format_double(c.residual_rot_noise));
  kv.set("refiner.residual_trans_noise", format_double(c.residual_trans_noise));
  kv.set("refiner.wander_angle", format_double(c.wander_angle));
  kv.set("refiner.wander_translation", format_double(c.wander_translation));
  kv.set("refiner.seed", std::to_string(c.seed));
  return kv;
}

// Ablation manifest -----------------------------------------------------------

struct RunManifest {
  std::string scenario_preset = "stress";
  std::filesystem::path scenario_config;  // optional; overrides the preset
  std::filesystem::path tracker_config;   // optional
  std::filesystem::path refiner_config;   // optional
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output_dir;
  std::vector<std::string> variants = {"full", "no-translation", "no-rotation"};

  void validate() const {
    if (seeds.empty()) throw InvalidConfig("manifest: at least one seed is required");
    if (variants.empty()) throw InvalidConfig("manifest: variant list is empty");
    for (const auto& v : variants) variant_flags(v);
    if (output_dir.empty()) throw InvalidConfig("manifest: output directory is required");
  }
};

/// Seed lists accept "1-20", "3, 5, 9" or a mix.
inline std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::string s = text;
  for (auto& c : s) if (c == ',') c = ' ';
  std::istringstream in(s);
  std::string tok;
  auto to_u64 = [&](const std::string& t) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) throw ParseError("seeds: bad seed '" + t + "'");
    return v;
  };
  while (in >> tok) {
    const auto dash = tok.find('-');
    if (dash == std::string::npos) {
      out.push_back(to_u64(tok));
      continue;
    }
    const auto lo = to_u64(tok.substr(0, dash)), hi = to_u64(tok.substr(dash + 1));
    if (hi < lo) throw ParseError("seeds: empty range '" + tok + "'");
    for (auto v = lo; v <= hi; ++v) out.push_back(v);
  }
  return out;
}

/// Relative paths in a manifest resolve against the manifest's directory.
inline RunManifest manifest_from_kv(const KeyValueConfig& kv, const std::filesystem::path& base_dir = {}) {
  kv.require_known({"scenario.preset", "scenario.config", "tracker.config", "refiner.config", "seeds", "output",
                    "variants"});
  auto resolve = [&](const std::string& p) -> std::filesystem::path {
    if (p.empty()) return {};
    std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  RunManifest m;
  m.scenario_preset = kv.get_string("scenario.preset", m.scenario_preset);
  m.scenario_config = resolve(kv.get_string("scenario.config", ""));
  m.tracker_config = resolve(kv.get_string("tracker.config", ""));
  m.refiner_config = resolve(kv.get_string("refiner.config", ""));
  m.seeds = parse_seed_list(kv.get_string("seeds", ""));
  m.output_dir = resolve(kv.get_string("output", ""));
  if (kv.has("variants")) {
    m.variants.clear();
    std::string s = kv.get_string("variants", "");
    for (auto& c : s) if (c == ',') c = ' ';
    std::istringstream in(s);
    std::string v;
    while (in >> v) m.variants.push_back(v);
  }
  return m;
}

}  // namespace dyntrack
