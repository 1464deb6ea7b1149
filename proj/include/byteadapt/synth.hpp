#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "byteadapt/detection.hpp"
#include "byteadapt/geometry.hpp"
#include "byteadapt/mot_io.hpp"

namespace byteadapt {

/// Score band override for one object over an inclusive frame range.
/// Models a partially occluded target: still detected, but low confidence.
struct OcclusionWindow {
  int object = 0;       ///< 0-based object index
  int first_frame = 1;  ///< inclusive
  int last_frame = 1;   ///< inclusive
  double score_lo = 0.0;
  double score_hi = 0.0;
};

struct ObjectMotion {
  BBox start;
  double vx = 0.0;  ///< pixels per frame
  double vy = 0.0;
};

struct ScenarioSpec {
  std::uint64_t seed = 1;
  int n_objects = 0;
  int frames = 1;
  double arena_width = 1920.0;
  double arena_height = 1080.0;
  double frame_rate = 30.0;
  std::vector<ObjectMotion> motion;  ///< one entry per object
  double noise_sigma = 0.0;          ///< Gaussian jitter on all four box coords
  double detect_prob = 1.0;
  std::vector<OcclusionWindow> occlusion_windows;
  double clutter_rate = 0.0;  ///< expected spurious boxes per frame (Poisson)
  std::pair<double, double> clutter_score_range{0.05, 0.3};
  std::pair<double, double> true_score_range{0.8, 1.0};
};

struct Scenario {
  GroundTruthMap ground_truth;
  std::map<int, std::vector<Detection>> detections;
};

namespace detail {

/// mt19937_64 with fixed output transforms, so a seed reproduces the same
/// stream on every platform (std::uniform_real_distribution and friends
/// are implementation-defined; these are not).
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : gen_(seed) {}

  /// [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Box-Muller, cosine branch only (no cached spare).
  double normal(double sigma) {
    double u1 = uniform();
    while (u1 <= 0.0) {
      u1 = uniform();
    }
    const double u2 = uniform();
    const double two_pi = 6.283185307179586476925286766559;
    return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  /// Knuth product-of-uniforms; fine for the small rates used here.
  int poisson(double lambda) {
    if (lambda <= 0.0) {
      return 0;
    }
    const double limit = std::exp(-lambda);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace detail

inline void validate(const ScenarioSpec& spec) {
  auto bad = [](const std::string& what) {
    throw std::invalid_argument("scenario spec: " + what);
  };
  if (spec.n_objects < 0) bad("n_objects must be >= 0");
  if (spec.frames < 1) bad("frames must be >= 1");
  if (spec.arena_width <= 0.0 || spec.arena_height <= 0.0) {
    bad("arena dimensions must be positive");
  }
  if (static_cast<int>(spec.motion.size()) != spec.n_objects) {
    bad("motion must have exactly one entry per object");
  }
  for (const auto& m : spec.motion) {
    if (m.start.width <= 0.0 || m.start.height <= 0.0) {
      bad("object start boxes must have positive size");
    }
    if (m.start.width > spec.arena_width || m.start.height > spec.arena_height) {
      bad("object start boxes must fit in the arena");
    }
  }
  if (spec.noise_sigma < 0.0) bad("noise_sigma must be >= 0");
  if (!(spec.detect_prob >= 0.0 && spec.detect_prob <= 1.0)) {
    bad("detect_prob must lie in [0, 1]");
  }
  if (spec.clutter_rate < 0.0) bad("clutter_rate must be >= 0");
  auto check_range = [&](std::pair<double, double> r, const char* name) {
    if (!(r.first >= 0.0 && r.second <= 1.0 && r.first <= r.second)) {
      bad(std::string(name) + " must satisfy 0 <= lo <= hi <= 1");
    }
  };
  check_range(spec.true_score_range, "true_score_range");
  check_range(spec.clutter_score_range, "clutter_score_range");
  for (const auto& w : spec.occlusion_windows) {
    if (w.object < 0 || w.object >= spec.n_objects) {
      bad("occlusion window references an unknown object");
    }
    if (w.first_frame < 1 || w.last_frame > spec.frames ||
        w.first_frame > w.last_frame) {
      bad("occlusion window frame range out of bounds");
    }
    check_range({w.score_lo, w.score_hi}, "occlusion window score range");
  }
}

/// Deterministic scenario generation.
///
/// Ground truth follows linear motion clipped to the arena (an object that
/// reaches a wall stays pinned against it). Each GT box is detected with
/// detect_prob; a detected box gets Gaussian noise on all four coordinates
/// and a score drawn uniformly from true_score_range, or from the score
/// range of the occlusion window covering (object, frame) if any. Clutter
/// boxes arrive Poisson(clutter_rate) per frame at uniform positions with
/// sizes copied from a random object's start box.
///
/// Draw order is fixed (per frame: per object in index order, detection
/// coin, then 4 noise values and the score only when detected; then the
/// clutter count and per-clutter donor/position/score), so identical
/// spec+seed give identical streams across platforms.
inline Scenario generate(const ScenarioSpec& spec) {
  validate(spec);
  detail::SynthRng rng(spec.seed);
  Scenario out;

  auto window_for = [&spec](int object, int frame) -> const OcclusionWindow* {
    for (const auto& w : spec.occlusion_windows) {
      if (w.object == object && frame >= w.first_frame && frame <= w.last_frame) {
        return &w;
      }
    }
    return nullptr;
  };

  for (int f = 1; f <= spec.frames; ++f) {
    auto& gt_frame = out.ground_truth[f];
    auto& det_frame = out.detections[f];
    for (int i = 0; i < spec.n_objects; ++i) {
      const auto& m = spec.motion[static_cast<std::size_t>(i)];
      BBox box = m.start;
      box.left += m.vx * (f - 1);
      box.top += m.vy * (f - 1);
      box.left = std::clamp(box.left, 0.0, spec.arena_width - box.width);
      box.top = std::clamp(box.top, 0.0, spec.arena_height - box.height);

      const OcclusionWindow* win = window_for(i, f);
      gt_frame.push_back(GtEntry{i + 1, box, win != nullptr ? 0.4 : 1.0});

      if (rng.uniform() < spec.detect_prob) {
        Detection d;
        d.frame = f;
        d.bbox.left = box.left + rng.normal(spec.noise_sigma);
        d.bbox.top = box.top + rng.normal(spec.noise_sigma);
        d.bbox.width = std::max(1.0, box.width + rng.normal(spec.noise_sigma));
        d.bbox.height = std::max(1.0, box.height + rng.normal(spec.noise_sigma));
        const auto range =
            win != nullptr ? std::pair{win->score_lo, win->score_hi}
                           : spec.true_score_range;
        d.score = rng.uniform(range.first, range.second);
        det_frame.push_back(d);
      }
    }
    if (spec.clutter_rate > 0.0 && spec.n_objects > 0) {
      const int k = rng.poisson(spec.clutter_rate);
      for (int j = 0; j < k; ++j) {
        const int donor = std::min(
            spec.n_objects - 1,
            static_cast<int>(rng.uniform() * spec.n_objects));
        const BBox& proto = spec.motion[static_cast<std::size_t>(donor)].start;
        Detection d;
        d.frame = f;
        d.bbox.width = proto.width;
        d.bbox.height = proto.height;
        d.bbox.left = rng.uniform(0.0, spec.arena_width - proto.width);
        d.bbox.top = rng.uniform(0.0, spec.arena_height - proto.height);
        d.score = rng.uniform(spec.clutter_score_range.first,
                              spec.clutter_score_range.second);
        det_frame.push_back(d);
      }
    }
  }
  return out;
}

/// Named, fully pinned scenario configurations used by the experiment
/// harness. Callers typically override only `seed`.
///
///   clean         10 well-separated objects, 200 frames, every object
///                 detected every frame with scores in [0.8, 1.0); three of
///                 them run into the right wall and stop mid-sequence.
///   occlusion-dip clean, plus a 15-frame low-confidence window
///                 ([0.35, 0.5)) on each wall-stopper, covering the moment
///                 it stops. A tracker that discards low-confidence
///                 detections loses exactly those targets while they are
///                 both occluded and changing motion.
///   dense-clutter 20 objects in 10 lanes plus ~10 clutter boxes per frame
///                 scored in [0.05, 0.3).
///   mot20-like    24 slower objects in 12 lanes, weaker scores
///                 ([0.55, 0.9)), occasional misses, clutter, and four
///                 occlusion windows at [0.2, 0.35).
inline ScenarioSpec preset(const std::string& name) {
  ScenarioSpec spec;
  if (name == "clean" || name == "occlusion-dip") {
    spec.n_objects = 10;
    spec.frames = 200;
    spec.noise_sigma = 1.0;
    spec.true_score_range = {0.8, 1.0};
    // Lanes are vertically disjoint so objects never overlap each other.
    // Objects 0-6 cruise and never reach a wall; 7-9 hit the right wall at
    // frames 60, 100 and 140 and stay pinned there.
    for (int i = 0; i < 10; ++i) {
      ObjectMotion m;
      m.start.width = 42.0 + i;
      m.start.height = 84.0 + 2.0 * i;
      m.start.top = 12.0 + 106.0 * i;
      if (i < 7) {
        const double speed = 4.0 + i % 4;
        if (i % 2 == 0) {
          m.start.left = 80.0 + 15.0 * i;
          m.vx = speed;
        } else {
          m.start.left = 1485.0 - 15.0 * i;
          m.vx = -speed;
        }
      } else {
        const int hit_frame = 60 + 40 * (i - 7);
        m.vx = 8.0;
        m.start.left = (1920.0 - m.start.width) - m.vx * (hit_frame - 1);
      }
      spec.motion.push_back(m);
    }
    if (name == "occlusion-dip") {
      spec.occlusion_windows = {
          {7, 55, 69, 0.35, 0.5},
          {8, 95, 109, 0.35, 0.5},
          {9, 135, 149, 0.35, 0.5},
      };
    }
  } else if (name == "dense-clutter") {
    spec.n_objects = 20;
    spec.frames = 200;
    spec.noise_sigma = 1.5;
    spec.clutter_rate = 10.0;
    spec.clutter_score_range = {0.05, 0.3};
    spec.true_score_range = {0.8, 1.0};
    // Two objects per lane at constant separation; nobody reaches a wall.
    for (int i = 0; i < 20; ++i) {
      const int lane = i % 10;
      ObjectMotion m;
      m.start.width = 44.0 + lane;
      m.start.height = 84.0 + 2.0 * lane;
      m.start.top = 12.0 + 106.0 * lane;
      m.start.left = (i < 10 ? 80.0 : 700.0) + 10.0 * lane;
      m.vx = 3.0 + lane % 3;
      spec.motion.push_back(m);
    }
  } else if (name == "mot20-like") {
    spec.n_objects = 24;
    spec.frames = 150;
    spec.noise_sigma = 2.0;
    spec.detect_prob = 0.97;
    spec.clutter_rate = 6.0;
    spec.clutter_score_range = {0.05, 0.35};
    spec.true_score_range = {0.55, 0.9};
    for (int i = 0; i < 24; ++i) {
      const int lane = i % 12;
      ObjectMotion m;
      m.start.width = 32.0 + 2.0 * (i % 6);
      m.start.height = 64.0 + 3.0 * (i % 6);
      m.start.top = 8.0 + 88.0 * lane;
      m.start.left = (i < 12 ? 60.0 : 640.0) + 8.0 * lane;
      m.vx = 2.0 + i % 3;
      spec.motion.push_back(m);
    }
    spec.occlusion_windows = {
        {3, 40, 54, 0.2, 0.35},
        {9, 60, 74, 0.2, 0.35},
        {15, 90, 104, 0.2, 0.35},
        {21, 110, 124, 0.2, 0.35},
    };
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  return spec;
}

/// Materializes a scenario as a MOTChallenge-layout sequence directory:
/// <dir>/det/det.txt, <dir>/gt/gt.txt, <dir>/seqinfo.ini. The sequence
/// name is the directory's basename.
inline void write_scenario(const std::string& dir, const ScenarioSpec& spec,
                           const Scenario& scenario) {
  const std::filesystem::path root(dir);
  std::filesystem::create_directories(root / "det");
  std::filesystem::create_directories(root / "gt");
  write_detections((root / "det" / "det.txt").string(), scenario.detections);
  write_ground_truth((root / "gt" / "gt.txt").string(), scenario.ground_truth);
  SeqInfo info;
  info.name = root.filename().string();
  info.seq_length = spec.frames;
  info.frame_rate = spec.frame_rate;
  write_seqinfo((root / "seqinfo.ini").string(), info,
                static_cast<int>(spec.arena_width),
                static_cast<int>(spec.arena_height));
}

}  // namespace byteadapt
