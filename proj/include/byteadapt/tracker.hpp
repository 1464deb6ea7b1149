#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "byteadapt/assignment.hpp"
#include "byteadapt/detection.hpp"
#include "byteadapt/geometry.hpp"
#include "byteadapt/kalman.hpp"
#include "byteadapt/threshold.hpp"

namespace byteadapt {

enum class TrackerMode {
  Sort,          ///< single association round on high detections only
  ByteFixed,     ///< two rounds, fixed confidence threshold
  ByteAdaptive,  ///< two rounds, per-frame steepest-drop threshold
};

inline const char* to_string(TrackerMode m) {
  switch (m) {
    case TrackerMode::Sort: return "sort";
    case TrackerMode::ByteFixed: return "byte-fixed";
    default: return "byte-adaptive";
  }
}

enum class TrackStatus {
  Tentative,  ///< born, awaiting one confirming match
  Tracked,    ///< matched recently; the only status that emits output
  Lost,       ///< unmatched but remembered for up to track_buffer frames
  Removed,    ///< dead; purged from the track list at the end of the step
};

struct TrackerConfig {
  TrackerMode mode = TrackerMode::ByteAdaptive;
  double fixed_threshold = 0.6;    ///< high/low split for sort and byte-fixed
  double score_floor = 0.1;        ///< detections below this are dropped outright
  double first_match_gate = 0.8;   ///< max cost (1 - IoU) in round one
  double second_match_gate = 0.5;  ///< max cost in the low-confidence round
  double tentative_match_gate = 0.3;  ///< max cost when confirming tentatives
  int track_buffer = 30;           ///< frames a lost track is kept alive
  double min_box_area = 10.0;      ///< input and output area filter
  double new_track_margin = 0.1;   ///< birth needs score >= threshold + margin
  double min_split_gap = 0.1;      ///< adaptive mode: see SplitMode::min_gap
  bool handle_tentative = true;    ///< false: births are tracked immediately
  KalmanParams kalman;
};

struct Track {
  int id = 0;
  TrackStatus status = TrackStatus::Tentative;
  KalmanState state;
  double score = 0.0;           ///< score of the last matched detection
  int last_update_frame = 0;    ///< frame of the last matched detection
  int frames_since_update = 0;  ///< 0 iff matched in the latest step
  int age = 0;                  ///< steps survived since birth, inclusive

  /// Current estimated box. If the filter has drifted to a non-physical
  /// state (h or aspect <= 0, possible after a long coast) this returns an
  /// empty box at the estimated centre: it can never match anything, so the
  /// track ages out naturally instead of throwing mid-pipeline.
  BBox bbox() const {
    if (state.mean(3) <= 0.0 || state.mean(2) <= 0.0) {
      return BBox{state.mean(0), state.mean(1), 0.0, 0.0};
    }
    return from_state_vector(
        {state.mean(0), state.mean(1), state.mean(2), state.mean(3)});
  }
};

struct TrackOutput {
  int id = 0;
  BBox bbox;
  double score = 0.0;
};

struct FrameResult {
  int frame = 0;
  std::vector<TrackOutput> outputs;  ///< ascending id order
};

/// Per-frame record of how the confidence split went, for logging/analysis.
struct SplitTrace {
  int frame = 0;
  double threshold = 1.0;
  int n_high = 0;
  int n_low = 0;
};

/// Tracking-by-detection with two association rounds.
///
/// Each step runs: split detections into high/low confidence, predict all
/// live tracks, match tracked+lost tracks against the high set, then give
/// the tracks that just went unmatched a second chance against the low set
/// (byte modes only), confirm tentatives, retire the stragglers, and start
/// new tracks from well-scored leftover high detections. Sort mode skips
/// the second round entirely and never sees low detections.
///
/// Ids are per-instance, start at 1 and are never reused. All processing is
/// deterministic: identical detection streams produce identical output.
class Tracker {
 public:
  explicit Tracker(TrackerConfig config = {}) : cfg_(config) {
    validate(cfg_);
  }

  const TrackerConfig& config() const { return cfg_; }

  /// Live tracks (everything not yet removed), creation order.
  const std::vector<Track>& tracks() const { return tracks_; }

  /// Split bookkeeping for the most recent step.
  const SplitTrace& last_split() const { return last_split_; }

  /// Advance one frame. frame_index must be strictly greater than any
  /// previous step's, and every detection must carry this frame index.
  FrameResult step(int frame_index, const std::vector<Detection>& detections);

  static void validate(const TrackerConfig& c) {
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(c.fixed_threshold) || !in_unit(c.score_floor) ||
        !in_unit(c.first_match_gate) || !in_unit(c.second_match_gate) ||
        !in_unit(c.tentative_match_gate) || !in_unit(c.new_track_margin) ||
        !in_unit(c.min_split_gap)) {
      throw std::invalid_argument(
          "tracker config: thresholds and gates must lie in [0, 1]");
    }
    if (c.track_buffer < 1) {
      throw std::invalid_argument("tracker config: track_buffer must be >= 1");
    }
    if (c.min_box_area < 0.0) {
      throw std::invalid_argument("tracker config: min_box_area must be >= 0");
    }
  }

 private:
  struct RoundInput {
    std::vector<std::size_t> track_idx;  ///< indices into tracks_
    std::vector<std::size_t> det_idx;    ///< indices into the kept detections
  };

  /// IoU-cost association restricted to cost <= gate. Returns (track index,
  /// detection index) pairs plus leftovers, all in terms of the pools given.
  void associate(const std::vector<Detection>& dets, const RoundInput& in,
                 double gate, std::vector<std::pair<std::size_t, std::size_t>>& matches,
                 std::vector<std::size_t>& leftover_tracks,
                 std::vector<std::size_t>& leftover_dets) const {
    matches.clear();
    leftover_tracks.clear();
    leftover_dets.clear();
    CostMatrix cost(in.track_idx.size(), in.det_idx.size());
    for (std::size_t r = 0; r < in.track_idx.size(); ++r) {
      const BBox tb = tracks_[in.track_idx[r]].bbox();
      for (std::size_t c = 0; c < in.det_idx.size(); ++c) {
        cost.at(r, c) = 1.0 - iou(tb, dets[in.det_idx[c]].bbox);
      }
    }
    const AssignmentResult res = solve(cost, gate);
    for (const auto& [r, c] : res.matches) {
      matches.emplace_back(in.track_idx[r], in.det_idx[c]);
    }
    for (std::size_t r : res.unmatched_rows) {
      leftover_tracks.push_back(in.track_idx[r]);
    }
    for (std::size_t c : res.unmatched_cols) {
      leftover_dets.push_back(in.det_idx[c]);
    }
  }

  void apply_match(Track& t, const Detection& d, int frame) {
    t.state = update(t.state, to_state_vector(d.bbox), cfg_.kalman);
    t.status = TrackStatus::Tracked;
    t.score = d.score;
    t.last_update_frame = frame;
    t.frames_since_update = 0;
  }

  TrackerConfig cfg_;
  std::vector<Track> tracks_;
  SplitTrace last_split_;
  int next_id_ = 1;
  int last_frame_ = 0;
  bool started_ = false;
};

inline FrameResult Tracker::step(int frame_index,
                                 const std::vector<Detection>& detections) {
  if (started_ && frame_index <= last_frame_) {
    throw std::invalid_argument(
        "tracker: frame index " + std::to_string(frame_index) +
        " not greater than previous " + std::to_string(last_frame_));
  }
  if (!started_ && frame_index < 1) {
    throw std::invalid_argument("tracker: frame indices are 1-based");
  }
  for (const auto& d : detections) {
    if (d.frame != frame_index) {
      throw std::invalid_argument(
          "tracker: detection frame " + std::to_string(d.frame) +
          " does not match step frame " + std::to_string(frame_index));
    }
  }
  const bool first_step = !started_;
  started_ = true;
  last_frame_ = frame_index;

  // Input filter: drop sub-floor scores and boxes too small or degenerate
  // to ever produce a valid state.
  std::vector<Detection> dets;
  dets.reserve(detections.size());
  for (const auto& d : detections) {
    if (d.score < cfg_.score_floor) continue;
    if (d.bbox.width <= 0.0 || d.bbox.height <= 0.0) continue;
    if (d.bbox.area() < cfg_.min_box_area) continue;
    dets.push_back(d);
  }

  // Confidence split. Sort mode uses the fixed threshold and discards the
  // low set; the byte modes keep it for the second round.
  SplitMode split_mode =
      cfg_.mode == TrackerMode::ByteAdaptive
          ? SplitMode::adaptive(cfg_.min_split_gap)
          : SplitMode::fixed(cfg_.fixed_threshold);
  ConfidenceSplit split = split_detections(dets, split_mode);
  if (cfg_.mode == TrackerMode::Sort) {
    split.low.clear();
  }
  last_split_ = SplitTrace{frame_index, split.threshold,
                           static_cast<int>(split.high.size()),
                           static_cast<int>(split.low.size())};

  // Predict every live track forward to this frame.
  for (auto& t : tracks_) {
    t.state = predict(t.state, cfg_.kalman);
    ++t.age;
  }

  // Pools by status at frame entry. Tentatives sit out the main rounds.
  std::vector<TrackStatus> entry_status(tracks_.size());
  RoundInput round1;
  std::vector<std::size_t> tentative_pool;
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    entry_status[i] = tracks_[i].status;
    if (tracks_[i].status == TrackStatus::Tentative) {
      tentative_pool.push_back(i);
    } else {
      round1.track_idx.push_back(i);
    }
  }
  round1.det_idx = split.high;

  std::vector<std::pair<std::size_t, std::size_t>> matches;
  std::vector<std::size_t> leftover_tracks, leftover_high;

  // Round one: tracked + lost vs high confidence.
  associate(dets, round1, cfg_.first_match_gate, matches, leftover_tracks,
            leftover_high);
  for (const auto& [ti, di] : matches) {
    apply_match(tracks_[ti], dets[di], frame_index);
  }

  // Round two: tracks that were confidently tracked a frame ago but just
  // missed get a second look at the low-confidence leftovers. This is what
  // carries a target through frames where its detection score dips.
  std::vector<std::size_t> unmatched_after_rounds;
  if (cfg_.mode != TrackerMode::Sort) {
    RoundInput round2;
    for (std::size_t ti : leftover_tracks) {
      if (entry_status[ti] == TrackStatus::Tracked) {
        round2.track_idx.push_back(ti);
      } else {
        unmatched_after_rounds.push_back(ti);
      }
    }
    round2.det_idx = split.low;
    std::vector<std::size_t> leftover2_tracks, leftover_low;
    associate(dets, round2, cfg_.second_match_gate, matches, leftover2_tracks,
              leftover_low);
    for (const auto& [ti, di] : matches) {
      apply_match(tracks_[ti], dets[di], frame_index);
    }
    unmatched_after_rounds.insert(unmatched_after_rounds.end(),
                                  leftover2_tracks.begin(),
                                  leftover2_tracks.end());
  } else {
    unmatched_after_rounds = leftover_tracks;
  }

  // Tentative round: last frame's births must re-appear among the leftover
  // high detections (tight gate) or they are dropped as noise.
  std::vector<std::size_t> birth_candidates;
  if (cfg_.handle_tentative) {
    RoundInput round3;
    round3.track_idx = tentative_pool;
    round3.det_idx = leftover_high;
    std::vector<std::size_t> dead_tentative;
    associate(dets, round3, cfg_.tentative_match_gate, matches, dead_tentative,
              birth_candidates);
    for (const auto& [ti, di] : matches) {
      apply_match(tracks_[ti], dets[di], frame_index);
    }
    for (std::size_t ti : dead_tentative) {
      tracks_[ti].status = TrackStatus::Removed;
    }
  } else {
    birth_candidates = leftover_high;
  }

  // Retire: a tracked miss goes lost, a lost miss past the buffer dies.
  for (std::size_t ti : unmatched_after_rounds) {
    Track& t = tracks_[ti];
    ++t.frames_since_update;
    if (entry_status[ti] == TrackStatus::Tracked) {
      t.status = TrackStatus::Lost;
    }
    if (t.status == TrackStatus::Lost &&
        t.frames_since_update > cfg_.track_buffer) {
      t.status = TrackStatus::Removed;
    }
  }

  // Births from the remaining high detections. The adaptive split already
  // vouches for everything above its per-frame threshold, so it births at
  // the threshold itself; the fixed modes ask for a safety margin on top.
  const double birth_floor =
      cfg_.mode == TrackerMode::ByteAdaptive
          ? split.threshold
          : cfg_.fixed_threshold + cfg_.new_track_margin;
  for (std::size_t di : birth_candidates) {
    const Detection& d = dets[di];
    if (d.score < birth_floor) continue;
    Track t;
    t.id = next_id_++;
    t.state = initiate(to_state_vector(d.bbox), cfg_.kalman);
    t.status = (first_step || !cfg_.handle_tentative) ? TrackStatus::Tracked
                                                      : TrackStatus::Tentative;
    t.score = d.score;
    t.last_update_frame = frame_index;
    t.frames_since_update = 0;
    t.age = 1;
    tracks_.push_back(t);
  }

  // Emit tracked targets passing the area filter; purge the dead.
  FrameResult result;
  result.frame = frame_index;
  for (const auto& t : tracks_) {
    if (t.status == TrackStatus::Tracked && t.bbox().area() >= cfg_.min_box_area) {
      result.outputs.push_back(TrackOutput{t.id, t.bbox(), t.score});
    }
  }
  std::erase_if(tracks_,
                [](const Track& t) { return t.status == TrackStatus::Removed; });
  return result;
}

/// Run a whole sequence through a fresh tracker. Frames run from 1 to the
/// last frame present in the map; missing frames are processed as empty so
/// lost-track bookkeeping advances through gaps.
inline std::vector<FrameResult> run_sequence(
    const TrackerConfig& config,
    const std::map<int, std::vector<Detection>>& frames,
    std::vector<SplitTrace>* traces = nullptr) {
  Tracker tracker(config);
  std::vector<FrameResult> out;
  if (frames.empty()) {
    return out;
  }
  const int last = frames.rbegin()->first;
  if (frames.begin()->first < 1) {
    throw std::invalid_argument("run_sequence: frame indices must be >= 1");
  }
  static const std::vector<Detection> kEmpty;
  for (int f = 1; f <= last; ++f) {
    const auto it = frames.find(f);
    out.push_back(tracker.step(f, it == frames.end() ? kEmpty : it->second));
    if (traces != nullptr) {
      traces->push_back(tracker.last_split());
    }
  }
  return out;
}

}  // namespace byteadapt
