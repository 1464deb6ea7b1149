#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "byteadapt/detection.hpp"
#include "byteadapt/tracker.hpp"

namespace byteadapt {

/// One ground-truth annotation row that survived filtering.
struct GtEntry {
  int id = 0;
  BBox bbox;
  double visibility = 1.0;
};

using GroundTruthMap = std::map<int, std::vector<GtEntry>>;
using ResultsMap = std::map<int, std::vector<TrackOutput>>;

/// A sequence as loaded from disk. detections_by_frame holds a key for
/// every frame in [1, frame_count], empty frames included, with in-frame
/// order equal to file order.
struct SequenceData {
  std::string name;
  int frame_count = 0;
  double frame_rate = 30.0;
  std::map<int, std::vector<Detection>> detections_by_frame;
  GroundTruthMap ground_truth_by_frame;  ///< empty when no gt file exists
  int clamped_scores = 0;  ///< detections whose confidence was clamped into [0, 1]
};

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& path, int line,
                                    const std::string& msg) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
}

inline std::vector<std::string_view> split_csv(std::string_view line,
                                               std::vector<std::string_view>& out) {
  out.clear();
  while (true) {
    const auto comma = line.find(',');
    out.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) {
      break;
    }
    line.remove_prefix(comma + 1);
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline double parse_double(std::string_view field, const std::string& path,
                           int line) {
  field = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    parse_fail(path, line, "bad number '" + std::string(field) + "'");
  }
  return v;
}

inline int parse_int(std::string_view field, const std::string& path, int line) {
  field = trim(field);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    parse_fail(path, line, "bad integer '" + std::string(field) + "'");
  }
  return v;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(path + ": cannot open for reading");
  }
  return in;
}

/// Writes content to path via a sibling temp file and an atomic rename, so
/// readers never observe a half-written file.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) {
    std::filesystem::create_directories(target.parent_path());
  }
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error(tmp.string() + ": cannot open for writing");
    }
    out << content;
    out.flush();
    if (!out) {
      throw std::runtime_error(tmp.string() + ": write failed");
    }
  }
  std::filesystem::rename(tmp, target);
}

inline void append_fixed(std::string& out, const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  out += buf;
}

}  // namespace detail

/// Reads a det.txt: `frame,id,left,top,width,height,conf[,x,y,z]` with id
/// conventionally -1. Confidence values outside [0, 1] are clamped and
/// counted (some public detection files carry unnormalized scores).
/// frame_count is inferred as the largest frame seen; every frame from 1 to
/// frame_count gets a map entry even when it has no detections. An empty
/// file is a valid empty sequence.
inline SequenceData read_detections(const std::string& path) {
  auto in = detail::open_input(path);
  SequenceData seq;
  seq.name = std::filesystem::path(path).stem().string();
  std::string line;
  std::vector<std::string_view> fields;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) {
      continue;
    }
    detail::split_csv(line, fields);
    if (fields.size() < 7) {
      detail::parse_fail(path, lineno, "expected at least 7 comma-separated fields");
    }
    Detection d;
    d.frame = detail::parse_int(fields[0], path, lineno);
    if (d.frame < 1) {
      detail::parse_fail(path, lineno, "frame index must be >= 1");
    }
    d.bbox.left = detail::parse_double(fields[2], path, lineno);
    d.bbox.top = detail::parse_double(fields[3], path, lineno);
    d.bbox.width = detail::parse_double(fields[4], path, lineno);
    d.bbox.height = detail::parse_double(fields[5], path, lineno);
    d.score = detail::parse_double(fields[6], path, lineno);
    if (d.score < 0.0 || d.score > 1.0) {
      d.score = std::clamp(d.score, 0.0, 1.0);
      ++seq.clamped_scores;
    }
    d.source_line = lineno;
    seq.frame_count = std::max(seq.frame_count, d.frame);
    seq.detections_by_frame[d.frame].push_back(d);
  }
  for (int f = 1; f <= seq.frame_count; ++f) {
    seq.detections_by_frame.try_emplace(f);
  }
  return seq;
}

/// Reads a gt.txt: `frame,id,left,top,width,height,flag,class,visibility`.
/// Keeps only rows with flag 1 and the pedestrian class (1); distractor and
/// ignore annotations drop out here so the metrics never see them.
inline GroundTruthMap read_ground_truth(const std::string& path) {
  auto in = detail::open_input(path);
  GroundTruthMap gt;
  std::string line;
  std::vector<std::string_view> fields;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) {
      continue;
    }
    detail::split_csv(line, fields);
    if (fields.size() < 9) {
      detail::parse_fail(path, lineno, "expected 9 comma-separated fields");
    }
    const int frame = detail::parse_int(fields[0], path, lineno);
    if (frame < 1) {
      detail::parse_fail(path, lineno, "frame index must be >= 1");
    }
    const int flag = detail::parse_int(fields[6], path, lineno);
    const int cls = detail::parse_int(fields[7], path, lineno);
    if (flag != 1 || cls != 1) {
      continue;
    }
    GtEntry e;
    e.id = detail::parse_int(fields[1], path, lineno);
    e.bbox.left = detail::parse_double(fields[2], path, lineno);
    e.bbox.top = detail::parse_double(fields[3], path, lineno);
    e.bbox.width = detail::parse_double(fields[4], path, lineno);
    e.bbox.height = detail::parse_double(fields[5], path, lineno);
    e.visibility = detail::parse_double(fields[8], path, lineno);
    gt[frame].push_back(e);
  }
  return gt;
}

/// Reads a result file produced by write_results (or any MOT submission
/// file): `frame,id,left,top,width,height,conf,...`.
inline ResultsMap read_results(const std::string& path) {
  auto in = detail::open_input(path);
  ResultsMap res;
  std::string line;
  std::vector<std::string_view> fields;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) {
      continue;
    }
    detail::split_csv(line, fields);
    if (fields.size() < 7) {
      detail::parse_fail(path, lineno, "expected at least 7 comma-separated fields");
    }
    const int frame = detail::parse_int(fields[0], path, lineno);
    if (frame < 1) {
      detail::parse_fail(path, lineno, "frame index must be >= 1");
    }
    TrackOutput t;
    t.id = detail::parse_int(fields[1], path, lineno);
    t.bbox.left = detail::parse_double(fields[2], path, lineno);
    t.bbox.top = detail::parse_double(fields[3], path, lineno);
    t.bbox.width = detail::parse_double(fields[4], path, lineno);
    t.bbox.height = detail::parse_double(fields[5], path, lineno);
    t.score = detail::parse_double(fields[6], path, lineno);
    res[frame].push_back(t);
  }
  return res;
}

/// Renders results in submission format: geometry with two decimals,
/// confidence with six, `\n` terminators, no padding. Byte-reproducible.
inline std::string format_results(const std::vector<FrameResult>& results) {
  std::string out;
  for (const auto& fr : results) {
    for (const auto& t : fr.outputs) {
      out += std::to_string(fr.frame);
      out += ',';
      out += std::to_string(t.id);
      detail::append_fixed(out, ",%.2f", t.bbox.left);
      detail::append_fixed(out, ",%.2f", t.bbox.top);
      detail::append_fixed(out, ",%.2f", t.bbox.width);
      detail::append_fixed(out, ",%.2f", t.bbox.height);
      detail::append_fixed(out, ",%.6f", t.score);
      out += ",-1,-1,-1\n";
    }
  }
  return out;
}

inline void write_results(const std::string& path,
                          const std::vector<FrameResult>& results) {
  detail::write_file_atomic(path, format_results(results));
}

/// det.txt emission (id column fixed at -1), same precision rules.
inline void write_detections(
    const std::string& path,
    const std::map<int, std::vector<Detection>>& detections) {
  std::string out;
  for (const auto& [frame, dets] : detections) {
    for (const auto& d : dets) {
      out += std::to_string(frame);
      out += ",-1";
      detail::append_fixed(out, ",%.2f", d.bbox.left);
      detail::append_fixed(out, ",%.2f", d.bbox.top);
      detail::append_fixed(out, ",%.2f", d.bbox.width);
      detail::append_fixed(out, ",%.2f", d.bbox.height);
      detail::append_fixed(out, ",%.6f", d.score);
      out += "\n";
    }
  }
  detail::write_file_atomic(path, out);
}

/// gt.txt emission with flag 1 and pedestrian class on every row.
inline void write_ground_truth(const std::string& path, const GroundTruthMap& gt) {
  std::string out;
  for (const auto& [frame, entries] : gt) {
    for (const auto& e : entries) {
      out += std::to_string(frame);
      out += ',';
      out += std::to_string(e.id);
      detail::append_fixed(out, ",%.2f", e.bbox.left);
      detail::append_fixed(out, ",%.2f", e.bbox.top);
      detail::append_fixed(out, ",%.2f", e.bbox.width);
      detail::append_fixed(out, ",%.2f", e.bbox.height);
      out += ",1,1";
      detail::append_fixed(out, ",%.2f", e.visibility);
      out += "\n";
    }
  }
  detail::write_file_atomic(path, out);
}

struct SeqInfo {
  std::string name;
  int seq_length = 0;
  double frame_rate = 30.0;
};

/// Minimal seqinfo.ini reader: only the [Sequence] section's seqLength and
/// frameRate keys are consumed (name kept when present).
inline SeqInfo read_seqinfo(const std::string& path) {
  auto in = detail::open_input(path);
  SeqInfo info;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '[' || t.front() == ';' || t.front() == '#') {
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      detail::parse_fail(path, lineno, "expected key=value");
    }
    const auto key = detail::trim(t.substr(0, eq));
    const auto value = detail::trim(t.substr(eq + 1));
    if (key == "seqLength") {
      info.seq_length = detail::parse_int(value, path, lineno);
    } else if (key == "frameRate") {
      info.frame_rate = detail::parse_double(value, path, lineno);
    } else if (key == "name") {
      info.name = std::string(value);
    }
  }
  return info;
}

inline void write_seqinfo(const std::string& path, const SeqInfo& info,
                          int im_width = 1920, int im_height = 1080) {
  std::string out;
  out += "[Sequence]\n";
  out += "name=" + info.name + "\n";
  out += "imDir=img1\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "frameRate=%g\n", info.frame_rate);
  out += buf;
  out += "seqLength=" + std::to_string(info.seq_length) + "\n";
  out += "imWidth=" + std::to_string(im_width) + "\n";
  out += "imHeight=" + std::to_string(im_height) + "\n";
  out += "imExt=.jpg\n";
  detail::write_file_atomic(path, out);
}

/// Loads a MOTChallenge-layout sequence directory: <dir>/det/det.txt
/// (required), <dir>/gt/gt.txt and <dir>/seqinfo.ini (optional). seqinfo's
/// seqLength extends frame_count when it exceeds the last detection frame.
inline SequenceData load_sequence(const std::string& dir) {
  const std::filesystem::path root(dir);
  SequenceData seq = read_detections((root / "det" / "det.txt").string());
  seq.name = root.filename().string();
  const auto info_path = root / "seqinfo.ini";
  if (std::filesystem::exists(info_path)) {
    const SeqInfo info = read_seqinfo(info_path.string());
    seq.frame_rate = info.frame_rate;
    if (info.seq_length > seq.frame_count) {
      seq.frame_count = info.seq_length;
      for (int f = 1; f <= seq.frame_count; ++f) {
        seq.detections_by_frame.try_emplace(f);
      }
    }
  }
  const auto gt_path = root / "gt" / "gt.txt";
  if (std::filesystem::exists(gt_path)) {
    seq.ground_truth_by_frame = read_ground_truth(gt_path.string());
  }
  return seq;
}

/// Sequence names under a dataset root: every direct child directory that
/// contains det/det.txt, sorted by name.
inline std::vector<std::string> discover_sequences(const std::string& root) {
  std::vector<std::string> names;
  if (!std::filesystem::is_directory(root)) {
    throw std::runtime_error(root + ": not a directory");
  }
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (entry.is_directory() &&
        std::filesystem::exists(entry.path() / "det" / "det.txt")) {
      names.push_back(entry.path().filename().string());
    }
  }
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace byteadapt
