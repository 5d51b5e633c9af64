#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dyntrack/config.hpp"
#include "dyntrack/io.hpp"
#include "dyntrack/metrics.hpp"
#include "dyntrack/records.hpp"
#include "dyntrack/refine.hpp"
#include "dyntrack/simulation.hpp"
#include "dyntrack/tracker.hpp"

namespace dyntrack::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kUsage = 1, kRuntime = 2 };

/// Bad invocation or unreadable input; maps to exit code 1.
class UsageError : public Error {
 public:
  using Error::Error;
};

inline constexpr const char* kOutRootEnv = "DYNTRACK_OUT_ROOT";

/// --out if given, else $DYNTRACK_OUT_ROOT/<leaf>, else ./dyntrack_out/<leaf>.
inline std::filesystem::path resolve_out(const std::string& out, const std::string& leaf) {
  if (!out.empty()) return out;
  const char* root = std::getenv(kOutRootEnv);
  return std::filesystem::path(root != nullptr && *root != '\0' ? root : "dyntrack_out") / leaf;
}

/// A single config file may mix scenario, tracker and refiner keys; they are
/// told apart by their section prefix.
struct ConfigSections {
  KeyValueConfig scenario;
  KeyValueConfig tracker;
  KeyValueConfig refiner;
};

inline ConfigSections split_sections(const KeyValueConfig& kv) {
  static const std::vector<std::string> scenario_prefixes = {"scenario.", "intrinsics.", "noise.", "object.",
                                                             "camera."};
  static const std::vector<std::string> tracker_prefixes = {"filter.", "sampler.", "schedule.", "tracker.",
                                                            "ablation."};
  auto starts = [](const std::string& k, const std::vector<std::string>& ps) {
    return std::any_of(ps.begin(), ps.end(), [&](const std::string& p) { return k.rfind(p, 0) == 0; });
  };
  ConfigSections s;
  for (const auto& [k, v] : kv.values()) {
    if (starts(k, scenario_prefixes)) {
      s.scenario.set(k, v);
    } else if (starts(k, tracker_prefixes)) {
      s.tracker.set(k, v);
    } else if (k.rfind("refiner.", 0) == 0) {
      s.refiner.set(k, v);
    } else {
      throw InvalidConfig("unknown config key '" + k + "'");
    }
  }
  return s;
}

inline KeyValueConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  if (!std::filesystem::exists(path)) throw UsageError("config file not found: " + path);
  return KeyValueConfig::load(path);
}

/// Scenario config from an optional preset, optional file and optional seed.
/// The file's keys override the preset, the seed overrides both.
inline ScenarioConfig resolve_scenario(const std::string& preset, const KeyValueConfig& scenario_kv,
                                       std::optional<std::uint64_t> seed) {
  KeyValueConfig kv = scenario_kv;
  if (!preset.empty()) {
    if (kv.has("scenario.preset") && kv.get_string("scenario.preset", "") != preset) {
      throw UsageError("--preset " + preset + " conflicts with scenario.preset in the config file");
    }
    kv.set("scenario.preset", preset);
  }
  if (seed) kv.set("scenario.seed", std::to_string(*seed));
  return scenario_from_kv(kv);
}

inline std::string dump_all(const ScenarioConfig& s, const TrackerConfig& t, const BasinRefinerConfig& r) {
  return scenario_to_kv(s).dump() + tracker_to_kv(t).dump() + refiner_to_kv(r).dump();
}

// Tracking pipeline --------------------------------------------------------------

struct TrackOutcome {
  std::vector<TrackResult> results;
  MetricsReport report;
  std::string config_digest;
  double mean_frame_seconds = 0.0;
};

/// Tracks a scenario from its first-frame ground-truth pose and scores it.
inline TrackOutcome track_scenario(const Scenario& scenario, const TrackerConfig& tracker,
                                   const BasinRefinerConfig& refiner_config) {
  if (scenario.frames.empty()) throw EmptyInput("track: scenario has no frames");
  const ObjectModel model = builtin_model(scenario.config.object_model_id, scenario.config.model_points);
  const BasinRefiner refiner(refiner_config);
  const TrackingSetup setup{scenario.config.intrinsics, &model};
  const Pose initial = oracle::ground_truth(scenario.frames.front()).object_cam;

  TrackOutcome out;
  out.results = run_sequence(scenario.frames, initial, tracker, refiner, setup);
  std::vector<Pose> gt, est;
  double total = 0.0;
  for (std::size_t i = 0; i < out.results.size(); ++i) {
    gt.push_back(oracle::ground_truth(scenario.frames[i]).object_cam);
    est.push_back(out.results[i].pose_cam);
    total += out.results[i].step_seconds;
  }
  out.report = build_report(gt, est, model);
  out.config_digest = hex_digest(dump_all(scenario.config, tracker, refiner_config));
  if (out.results.size() > 1) out.mean_frame_seconds = total / static_cast<double>(out.results.size() - 1);
  return out;
}

inline std::vector<std::int64_t> frame_indices(const std::vector<TrackResult>& results) {
  std::vector<std::int64_t> idx;
  for (const auto& r : results) idx.push_back(r.frame_index);
  return idx;
}

// Commands -----------------------------------------------------------------------

struct SimulateOptions {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out;
};

/// Writes <out>/scenario.jsonl and prints the ground-truth relative motion peaks.
inline int cmd_simulate(const SimulateOptions& o, std::ostream& os) {
  const auto sections = split_sections(load_config(o.config));
  const ScenarioConfig config = resolve_scenario(o.preset, sections.scenario, o.seed);
  const Scenario scenario = generate_scenario(config);
  const auto dir = resolve_out(o.out, "simulate");
  save_scenario(scenario, dir / "scenario.jsonl");
  const RelativeMotion m = relative_motion(scenario);
  os << "frames " << scenario.frames.size() << "\n";
  os << "peak_relative_speed_mps " << format_double(m.peak_speed) << "\n";
  os << "peak_relative_angular_speed_radps " << format_double(m.peak_angular_speed) << "\n";
  os << "scenario " << (dir / "scenario.jsonl").string() << "\n";
  return kOk;
}

struct TrackOptions {
  std::string scenario;        // existing scenario file; else generated from preset/config
  std::string config;          // tracker and refiner keys (scenario keys used only when generating)
  std::string refiner_config;  // optional separate refiner file
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string variant;  // full, no-translation or no-rotation; empty keeps the config's ablation keys
  std::string out;
};

/// Writes results.jsonl, report.json and metrics.csv under <out>.
inline int cmd_track(const TrackOptions& o, std::ostream& os) {
  const auto sections = split_sections(load_config(o.config));
  KeyValueConfig refiner_kv = sections.refiner;
  if (!o.refiner_config.empty()) {
    const auto extra = split_sections(load_config(o.refiner_config));
    for (const auto& [k, v] : extra.refiner.values()) refiner_kv.set(k, v);
  }
  TrackerConfig tracker = tracker_from_kv(sections.tracker);
  if (!o.variant.empty()) tracker = ablation_variant(tracker, variant_flags(o.variant));
  const BasinRefinerConfig refiner = refiner_from_kv(refiner_kv);

  Scenario scenario;
  if (!o.scenario.empty()) {
    if (!std::filesystem::exists(o.scenario)) throw UsageError("scenario file not found: " + o.scenario);
    if (!o.preset.empty() || o.seed) throw UsageError("--preset/--seed cannot be combined with --scenario");
    scenario = load_scenario(o.scenario);
  } else {
    scenario = generate_scenario(resolve_scenario(o.preset, sections.scenario, o.seed));
  }

  const TrackOutcome t = track_scenario(scenario, tracker, refiner);
  const auto dir = resolve_out(o.out, "track");
  write_file_atomic(dir / "results.jsonl", serialize_results(t.results));
  write_file_atomic(dir / "report.json", format_report_json(t.report, t.config_digest, scenario.config.seed));
  write_file_atomic(dir / "metrics.csv", format_metrics_csv(metrics_rows(t.report, frame_indices(t.results))));
  os << "object " << t.report.object << "\n";
  os << "auc_add " << format_double(t.report.auc_add) << "\n";
  os << "auc_adds " << format_double(t.report.auc_adds) << "\n";
  os << "success_rate " << format_double(t.report.success_rate) << "\n";
  os << "mean_frame_time_ms " << format_double(t.mean_frame_seconds * 1e3) << "\n";
  return kOk;
}

struct AblationCell {
  std::string variant;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double auc_add = 0.0;
  double auc_adds = 0.0;
  double success_rate = 0.0;
};

struct AblationSummary {
  std::vector<AblationCell> cells;  // variant-major, then seed order

  std::vector<const AblationCell*> of(const std::string& variant) const {
    std::vector<const AblationCell*> out;
    for (const auto& c : cells) {
      if (c.variant == variant && c.ok) out.push_back(&c);
    }
    return out;
  }
};

inline double median(std::vector<double> v) {
  if (v.empty()) throw EmptyInput("median of an empty list");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Runs every (variant, seed) cell. Cells are independent and may run on
/// `jobs` threads; the result order does not depend on scheduling.
inline AblationSummary run_ablation(const ScenarioConfig& base_scenario, const TrackerConfig& base_tracker,
                                    const BasinRefinerConfig& refiner, const std::vector<std::string>& variants,
                                    const std::vector<std::uint64_t>& seeds, unsigned jobs = 1) {
  AblationSummary summary;
  for (const auto& v : variants) {
    for (auto s : seeds) {
      AblationCell c;
      c.variant = v;
      c.seed = s;
      summary.cells.push_back(std::move(c));
    }
  }
  auto run_cell = [&](AblationCell& cell) {
    try {
      ScenarioConfig sc = base_scenario;
      sc.seed = cell.seed;
      const Scenario scenario = generate_scenario(sc);
      const TrackerConfig tc = ablation_variant(base_tracker, variant_flags(cell.variant));
      const TrackOutcome t = track_scenario(scenario, tc, refiner);
      cell.auc_add = t.report.auc_add;
      cell.auc_adds = t.report.auc_adds;
      cell.success_rate = t.report.success_rate;
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  };
  if (jobs <= 1) {
    for (auto& c : summary.cells) run_cell(c);
    return summary;
  }
  for (std::size_t start = 0; start < summary.cells.size(); start += jobs) {
    std::vector<std::future<void>> batch;
    for (std::size_t i = start; i < std::min(summary.cells.size(), start + jobs); ++i) {
      batch.push_back(std::async(std::launch::async, run_cell, std::ref(summary.cells[i])));
    }
    for (auto& f : batch) f.get();
  }
  return summary;
}

inline std::string format_ablation_csv(const AblationSummary& s) {
  std::string out = "variant,seed,status,auc_add,auc_adds,success_rate\n";
  for (const auto& c : s.cells) {
    out += c.variant + "," + std::to_string(c.seed) + "," + (c.ok ? "ok" : "failed") + "," +
           (c.ok ? format_double(c.auc_add) : "") + "," + (c.ok ? format_double(c.auc_adds) : "") + "," +
           (c.ok ? format_double(c.success_rate) : "") + "\n";
  }
  return out;
}

inline std::string format_ablation_table(const AblationSummary& s, const std::vector<std::string>& variants) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%9.4f", v);
    return std::string(buf);
  };
  auto pad = [](std::string t, std::size_t w) {
    t.resize(std::max(t.size(), w), ' ');
    return t;
  };
  std::string out = pad("variant", 16) + pad("seed", 8) + "  auc_add  auc_adds   success\n";
  for (const auto& c : s.cells) {
    out += pad(c.variant, 16) + pad(std::to_string(c.seed), 8);
    out += c.ok ? num(c.auc_add) + num(c.auc_adds) + num(c.success_rate) + "\n" : "  FAILED: " + c.error + "\n";
  }
  out += "\n" + pad("median", 16) + pad("runs", 8) + "  auc_add  auc_adds   success\n";
  for (const auto& v : variants) {
    const auto cells = s.of(v);
    out += pad(v, 16) + pad(std::to_string(cells.size()), 8);
    if (cells.empty()) {
      out += "  no successful runs\n";
      continue;
    }
    std::vector<double> a, b, c;
    for (const auto* cell : cells) {
      a.push_back(cell->auc_add);
      b.push_back(cell->auc_adds);
      c.push_back(cell->success_rate);
    }
    out += num(median(a)) + num(median(b)) + num(median(c)) + "\n";
  }
  return out;
}

struct AblateOptions {
  std::string manifest;
  std::string preset;  // overrides the manifest's scenario preset
  std::string out;     // overrides the manifest's output directory
  unsigned jobs = 1;
};

/// Writes ablation.csv and summary.txt under the output directory; failed
/// cells are listed in failures.txt and make the command exit with 2.
inline int cmd_ablate(const AblateOptions& o, std::ostream& os) {
  if (o.manifest.empty()) throw UsageError("ablate needs a manifest (--config)");
  const KeyValueConfig mkv = load_config(o.manifest);
  RunManifest m = manifest_from_kv(mkv, std::filesystem::path(o.manifest).parent_path());
  if (!o.preset.empty()) m.scenario_preset = o.preset;
  if (!o.out.empty()) m.output_dir = o.out;
  if (m.output_dir.empty()) m.output_dir = resolve_out("", "ablate");
  m.validate();

  KeyValueConfig scenario_kv;
  if (!m.scenario_config.empty()) scenario_kv = split_sections(load_config(m.scenario_config.string())).scenario;
  if (!scenario_kv.has("scenario.preset")) scenario_kv.set("scenario.preset", m.scenario_preset);
  const ScenarioConfig scenario = scenario_from_kv(scenario_kv);
  const TrackerConfig tracker = tracker_from_kv(split_sections(load_config(m.tracker_config.string())).tracker);
  const BasinRefinerConfig refiner =
      refiner_from_kv(split_sections(load_config(m.refiner_config.string())).refiner);

  const AblationSummary s = run_ablation(scenario, tracker, refiner, m.variants, m.seeds, o.jobs);
  const std::string table = format_ablation_table(s, m.variants);
  write_file_atomic(m.output_dir / "ablation.csv", format_ablation_csv(s));
  write_file_atomic(m.output_dir / "summary.txt", table);
  os << table;

  std::string failures;
  for (const auto& c : s.cells) {
    if (!c.ok) failures += c.variant + " seed " + std::to_string(c.seed) + ": " + c.error + "\n";
  }
  if (!failures.empty()) {
    write_file_atomic(m.output_dir / "failures.txt", failures);
    os << "failed runs:\n" << failures;
    return kRuntime;
  }
  return kOk;
}

/// Effective configuration (all keys, defaults filled in) as a loadable file.
inline int cmd_print_config(const std::string& config, const std::string& preset, std::optional<std::uint64_t> seed,
                            std::ostream& os) {
  const auto sections = split_sections(load_config(config));
  const ScenarioConfig s = resolve_scenario(preset, sections.scenario, seed);
  os << dump_all(s, tracker_from_kv(sections.tracker), refiner_from_kv(sections.refiner));
  return kOk;
}

}  // namespace dyntrack::cli
