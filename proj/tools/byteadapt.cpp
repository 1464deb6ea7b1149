// byteadapt: tracking-by-detection experiment harness.
//
//   byteadapt synth --preset occlusion-dip --seed 7 --output-dir seq/
//   byteadapt track --detections seq/det/det.txt --output out.txt
//   byteadapt eval  --gt seq/gt/gt.txt --results out.txt --format kv
//   byteadapt sweep --detections seq/det/det.txt --gt seq/gt/gt.txt \
//                   --grid 0.1:0.9:0.1 --output sweep.csv
//
// Exit codes: 0 success, 1 I/O or file-content errors, 2 argument errors.
// Set BYTEADAPT_LOG=info or =debug for progress diagnostics on stderr.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "byteadapt/byteadapt.hpp"

namespace {

using namespace byteadapt;

int g_log_level = 0;  // 0 quiet, 1 info, 2 debug

void init_logging() {
  const char* v = std::getenv("BYTEADAPT_LOG");
  if (v == nullptr) return;
  const std::string s(v);
  if (s == "debug") {
    g_log_level = 2;
  } else if (s == "info") {
    g_log_level = 1;
  }
}

void log_info(const std::string& msg) {
  if (g_log_level >= 1) std::cerr << "[byteadapt] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (g_log_level >= 2) std::cerr << "[byteadapt:debug] " << msg << "\n";
}

/// Argument-contract violation detected after CLI11 parsing (e.g. the
/// mode/threshold pairing rules). Mapped to exit code 2 like any usage error.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

TrackerMode mode_from_string(const std::string& s) {
  if (s == "sort") return TrackerMode::Sort;
  if (s == "byte-fixed") return TrackerMode::ByteFixed;
  if (s == "byte-adaptive") return TrackerMode::ByteAdaptive;
  throw UsageError("unknown mode '" + s +
                   "' (expected sort, byte-fixed or byte-adaptive)");
}

// ---------------------------------------------------------------------------
// Config files: flat key=value lines mirroring TrackerConfig field names,
// '#' comments, plus optional [sequence.<name>] sections whose entries apply
// only to that sequence. Precedence: defaults < global keys < sequence
// section < command-line flags.

struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
};

struct ConfigFile {
  std::string path;
  std::vector<ConfigEntry> global;
  std::map<std::string, std::vector<ConfigEntry>> per_sequence;
};

ConfigFile read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(path + ": cannot open config file");
  }
  ConfigFile cfg;
  cfg.path = path;
  std::vector<ConfigEntry>* target = &cfg.global;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = line;
    if (const auto hash = t.find('#'); hash != std::string::npos) {
      t.erase(hash);
    }
    while (!t.empty() && (t.back() == '\r' || t.back() == ' ' || t.back() == '\t')) {
      t.pop_back();
    }
    std::size_t start = 0;
    while (start < t.size() && (t[start] == ' ' || t[start] == '\t')) ++start;
    t.erase(0, start);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": unterminated section header");
      }
      const std::string section = t.substr(1, t.size() - 2);
      const std::string prefix = "sequence.";
      if (section.rfind(prefix, 0) != 0 || section.size() == prefix.size()) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": unknown section '" + section +
                                 "' (expected [sequence.<name>])");
      }
      target = &cfg.per_sequence[section.substr(prefix.size())];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key=value");
    }
    ConfigEntry e;
    e.key = std::string(t.substr(0, eq));
    while (!e.key.empty() && (e.key.back() == ' ' || e.key.back() == '\t')) {
      e.key.pop_back();
    }
    std::string value = t.substr(eq + 1);
    std::size_t vstart = 0;
    while (vstart < value.size() && (value[vstart] == ' ' || value[vstart] == '\t')) {
      ++vstart;
    }
    e.value = value.substr(vstart);
    e.line = lineno;
    target->push_back(std::move(e));
  }
  return cfg;
}

double config_double(const ConfigEntry& e, const std::string& path) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(path + ":" + std::to_string(e.line) +
                             ": invalid number '" + e.value + "' for " + e.key);
  }
}

int config_int(const ConfigEntry& e, const std::string& path) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(path + ":" + std::to_string(e.line) +
                             ": invalid integer '" + e.value + "' for " + e.key);
  }
}

bool config_bool(const ConfigEntry& e, const std::string& path) {
  if (e.value == "true" || e.value == "1") return true;
  if (e.value == "false" || e.value == "0") return false;
  throw std::runtime_error(path + ":" + std::to_string(e.line) +
                           ": invalid boolean '" + e.value + "' for " + e.key);
}

/// Applies one config entry. `saw_threshold` records whether the file pinned
/// fixed_threshold, which satisfies the threshold requirement of the fixed
/// modes.
void apply_entry(TrackerConfig& cfg, const ConfigEntry& e,
                 const std::string& path, bool& saw_threshold) {
  if (e.key == "mode") {
    try {
      cfg.mode = mode_from_string(e.value);
    } catch (const UsageError&) {
      throw std::runtime_error(path + ":" + std::to_string(e.line) +
                               ": invalid mode '" + e.value + "'");
    }
  } else if (e.key == "fixed_threshold") {
    cfg.fixed_threshold = config_double(e, path);
    saw_threshold = true;
  } else if (e.key == "score_floor") {
    cfg.score_floor = config_double(e, path);
  } else if (e.key == "first_match_gate") {
    cfg.first_match_gate = config_double(e, path);
  } else if (e.key == "second_match_gate") {
    cfg.second_match_gate = config_double(e, path);
  } else if (e.key == "tentative_match_gate") {
    cfg.tentative_match_gate = config_double(e, path);
  } else if (e.key == "track_buffer") {
    cfg.track_buffer = config_int(e, path);
  } else if (e.key == "min_box_area") {
    cfg.min_box_area = config_double(e, path);
  } else if (e.key == "new_track_margin") {
    cfg.new_track_margin = config_double(e, path);
  } else if (e.key == "min_split_gap") {
    cfg.min_split_gap = config_double(e, path);
  } else if (e.key == "handle_tentative") {
    cfg.handle_tentative = config_bool(e, path);
  } else if (e.key == "kalman_position_weight") {
    cfg.kalman.position_weight = config_double(e, path);
  } else if (e.key == "kalman_velocity_weight") {
    cfg.kalman.velocity_weight = config_double(e, path);
  } else {
    throw std::runtime_error(path + ":" + std::to_string(e.line) +
                             ": unknown config key '" + e.key + "'");
  }
}

// ---------------------------------------------------------------------------
// track

struct TrackArgs {
  std::string detections;
  std::string dataset;
  std::string sequence;
  std::string mode;
  double threshold = 0.0;
  bool threshold_given = false;
  bool mode_given = false;
  std::string output;
  std::string config_path;
  std::string log_thresholds;
  int jobs = 1;
};

/// Resolves the effective tracker configuration for one sequence, enforcing
/// the mode/threshold contract on the result.
TrackerConfig resolve_config(const TrackArgs& args,
                             const std::optional<ConfigFile>& file,
                             const std::string& sequence_name) {
  TrackerConfig cfg;
  bool saw_threshold = false;
  if (file) {
    for (const auto& e : file->global) {
      apply_entry(cfg, e, file->path, saw_threshold);
    }
    if (!sequence_name.empty()) {
      const auto it = file->per_sequence.find(sequence_name);
      if (it != file->per_sequence.end()) {
        for (const auto& e : it->second) {
          apply_entry(cfg, e, file->path, saw_threshold);
        }
      }
    }
  }
  if (args.mode_given) {
    cfg.mode = mode_from_string(args.mode);
  }
  if (args.threshold_given) {
    cfg.fixed_threshold = args.threshold;
    saw_threshold = true;
  }
  if (cfg.mode == TrackerMode::ByteAdaptive && args.threshold_given) {
    throw UsageError("--threshold is only valid with --mode sort or byte-fixed");
  }
  if (cfg.mode != TrackerMode::ByteAdaptive && !saw_threshold) {
    throw UsageError(std::string("--mode ") + to_string(cfg.mode) +
                     " requires --threshold (or fixed_threshold in --config)");
  }
  Tracker::validate(cfg);
  return cfg;
}

std::string format_trace_csv(const std::vector<SplitTrace>& traces) {
  std::string out = "frame,threshold,n_high,n_low\n";
  char buf[96];
  for (const auto& t : traces) {
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%d,%d\n", t.frame, t.threshold,
                  t.n_high, t.n_low);
    out += buf;
  }
  return out;
}

void track_one(const TrackerConfig& cfg,
               const std::map<int, std::vector<Detection>>& frames,
               const std::string& output_path,
               const std::string& trace_path) {
  std::vector<SplitTrace> traces;
  const auto results =
      run_sequence(cfg, frames, trace_path.empty() ? nullptr : &traces);
  write_results(output_path, results);
  if (!trace_path.empty()) {
    detail::write_file_atomic(trace_path, format_trace_csv(traces));
  }
}

int run_track(const TrackArgs& args) {
  if (args.detections.empty() == args.dataset.empty()) {
    throw UsageError("exactly one of --detections and --dataset is required");
  }
  if (!args.sequence.empty() && args.dataset.empty()) {
    throw UsageError("--sequence requires --dataset");
  }
  if (args.jobs < 1) {
    throw UsageError("--jobs must be >= 1");
  }
  std::optional<ConfigFile> file;
  if (!args.config_path.empty()) {
    file = read_config_file(args.config_path);
  }

  if (!args.detections.empty()) {
    const TrackerConfig cfg = resolve_config(args, file, "");
    log_info("tracking " + args.detections + " in mode " + to_string(cfg.mode));
    const SequenceData seq = read_detections(args.detections);
    if (seq.clamped_scores > 0) {
      log_info(std::to_string(seq.clamped_scores) +
               " detection scores clamped into [0, 1]");
    }
    track_one(cfg, seq.detections_by_frame, args.output, args.log_thresholds);
    return 0;
  }

  std::vector<std::string> names;
  if (!args.sequence.empty()) {
    names.push_back(args.sequence);
  } else {
    names = discover_sequences(args.dataset);
    if (names.empty()) {
      throw std::runtime_error(args.dataset + ": no sequences found");
    }
  }
  if (!args.log_thresholds.empty() && names.size() > 1) {
    throw UsageError("--log-thresholds needs a single sequence (use --sequence)");
  }
  std::filesystem::create_directories(args.output);

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(args.jobs), names.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(names.size());
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= names.size()) return;
      try {
        const std::string& name = names[i];
        const TrackerConfig cfg = resolve_config(args, file, name);
        log_debug("sequence " + name + ": mode " + to_string(cfg.mode));
        const SequenceData seq = load_sequence(
            (std::filesystem::path(args.dataset) / name).string());
        const auto out_path =
            (std::filesystem::path(args.output) / (name + ".txt")).string();
        track_one(cfg, seq.detections_by_frame, out_path, args.log_thresholds);
        log_info("sequence " + name + " -> " + out_path);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string gt;
  std::string results;
  double iou_gate = 0.5;
  std::string format = "table";
};

int run_eval(const EvalArgs& args) {
  const GroundTruthMap gt = read_ground_truth(args.gt);
  const ResultsMap results = read_results(args.results);
  const EvalReport rep = evaluate(gt, results, args.iou_gate);
  std::cout << (args.format == "kv" ? format_kv(rep) : format_table(rep));
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  std::string detections;
  std::string gt;
  std::string grid = "0.1:0.9:0.1";
  std::string output;
};

std::vector<double> parse_grid(const std::string& spec) {
  double lo = 0.0, hi = 0.0, step = 0.0;
  char tail = '\0';
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf%c", &lo, &hi, &step, &tail) != 3) {
    throw UsageError("malformed grid '" + spec + "' (expected lo:hi:step)");
  }
  if (!(step > 0.0) || lo > hi || lo < 0.0 || hi > 1.0) {
    throw UsageError("grid '" + spec +
                     "' must satisfy 0 <= lo <= hi <= 1 with step > 0");
  }
  const long long count = std::llround((hi - lo) / step);
  if (count > 999) {
    throw UsageError("grid '" + spec + "' has too many points");
  }
  std::vector<double> points;
  for (long long k = 0; k <= count; ++k) {
    const double t = lo + static_cast<double>(k) * step;
    if (t <= hi + step * 1e-6) points.push_back(t);
  }
  return points;
}

ResultsMap to_results_map(const std::vector<FrameResult>& frames) {
  ResultsMap out;
  for (const auto& fr : frames) {
    if (!fr.outputs.empty()) out[fr.frame] = fr.outputs;
  }
  return out;
}

int run_sweep(const SweepArgs& args) {
  const std::vector<double> grid = parse_grid(args.grid);
  const SequenceData seq = read_detections(args.detections);
  const GroundTruthMap gt = read_ground_truth(args.gt);

  std::string csv = "mode,threshold,mota,idf1,fp,fn,idsw\n";
  char buf[160];
  auto run_one = [&](TrackerConfig cfg) {
    const auto results = run_sequence(cfg, seq.detections_by_frame);
    return evaluate(gt, to_results_map(results));
  };
  for (const double t : grid) {
    TrackerConfig cfg;
    cfg.mode = TrackerMode::ByteFixed;
    cfg.fixed_threshold = t;
    const EvalReport rep = run_one(cfg);
    std::snprintf(buf, sizeof(buf), "fixed,%.2f,%.6f,%.6f,%lld,%lld,%lld\n", t,
                  rep.mota, rep.idf1, rep.fp, rep.fn, rep.id_switches);
    csv += buf;
    log_info("fixed " + std::to_string(t) + " done");
  }
  TrackerConfig adaptive;
  adaptive.mode = TrackerMode::ByteAdaptive;
  const EvalReport rep = run_one(adaptive);
  std::snprintf(buf, sizeof(buf), "adaptive,NA,%.6f,%.6f,%lld,%lld,%lld\n",
                rep.mota, rep.idf1, rep.fp, rep.fn, rep.id_switches);
  csv += buf;

  detail::write_file_atomic(args.output, csv);
  log_info("sweep written to " + args.output);
  return 0;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string preset_name;
  std::uint64_t seed = 1;
  std::string output_dir;
};

int run_synth(const SynthArgs& args) {
  ScenarioSpec spec = preset(args.preset_name);
  spec.seed = args.seed;
  const Scenario scenario = generate(spec);
  write_scenario(args.output_dir, spec, scenario);
  log_info("scenario " + args.preset_name + " (seed " +
           std::to_string(args.seed) + ") written to " + args.output_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"tracking-by-detection harness: track, evaluate, sweep, synth"};
  app.require_subcommand(1);

  TrackArgs track_args;
  CLI::App* track = app.add_subcommand("track", "run the tracker on detections");
  track->add_option("--detections", track_args.detections,
                    "MOT det.txt file (single-sequence mode)");
  track->add_option("--dataset", track_args.dataset,
                    "dataset root containing <seq>/det/det.txt trees");
  track->add_option("--sequence", track_args.sequence,
                    "restrict --dataset to one sequence");
  CLI::Option* mode_opt =
      track->add_option("--mode", track_args.mode, "sort|byte-fixed|byte-adaptive")
          ->check(CLI::IsMember({"sort", "byte-fixed", "byte-adaptive"}));
  CLI::Option* thr_opt = track->add_option(
      "--threshold", track_args.threshold,
      "fixed confidence threshold (required for sort and byte-fixed)");
  track->add_option("--output", track_args.output,
                    "result file (or directory in --dataset mode)")
      ->required();
  track->add_option("--config", track_args.config_path,
                    "key=value config file with optional [sequence.<name>] sections");
  track->add_option("--log-thresholds", track_args.log_thresholds,
                    "write per-frame split trace CSV here");
  track->add_option("--jobs", track_args.jobs,
                    "parallel sequences in --dataset mode");

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "score results against ground truth");
  eval_cmd->add_option("--gt", eval_args.gt, "MOT gt.txt file")->required();
  eval_cmd->add_option("--results", eval_args.results, "tracker output file")
      ->required();
  eval_cmd->add_option("--iou-gate", eval_args.iou_gate,
                       "IoU needed to count a match (default 0.5)");
  eval_cmd->add_option("--format", eval_args.format, "table (default) or kv")
      ->check(CLI::IsMember({"table", "kv"}));

  SweepArgs sweep_args;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "fixed-threshold grid plus one adaptive run, as CSV");
  sweep->add_option("--detections", sweep_args.detections, "MOT det.txt file")
      ->required();
  sweep->add_option("--gt", sweep_args.gt, "MOT gt.txt file")->required();
  sweep->add_option("--grid", sweep_args.grid, "lo:hi:step (default 0.1:0.9:0.1)");
  sweep->add_option("--output", sweep_args.output, "CSV output path")->required();

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic sequence");
  synth->add_option("--preset", synth_args.preset_name,
                    "clean|occlusion-dip|dense-clutter|mot20-like")
      ->required()
      ->check(CLI::IsMember(
          {"clean", "occlusion-dip", "dense-clutter", "mot20-like"}));
  synth->add_option("--seed", synth_args.seed, "rng seed (default 1)");
  synth->add_option("--output-dir", synth_args.output_dir,
                    "sequence directory to create")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  track_args.mode_given = mode_opt->count() > 0;
  track_args.threshold_given = thr_opt->count() > 0;

  try {
    if (track->parsed()) return run_track(track_args);
    if (eval_cmd->parsed()) return run_eval(eval_args);
    if (sweep->parsed()) return run_sweep(sweep_args);
    if (synth->parsed()) return run_synth(synth_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
