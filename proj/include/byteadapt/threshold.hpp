#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "byteadapt/detection.hpp"

namespace byteadapt {

/// Steepest-drop confidence threshold.
///
/// Sorts the scores in decreasing order c_1 >= c_2 >= ... >= c_n and locates
/// the index j* minimising the adjacent difference c_{j+1} - c_j, i.e. the
/// largest single drop in the sorted curve. Returns c_{j*}, the score at the
/// upper edge of that drop, so a comparison `score >= threshold` keeps the
/// head of the curve. Ties pick the earliest (highest-scoring) drop.
///
/// A single score is its own threshold. Throws std::invalid_argument on an
/// empty span or on any score outside [0, 1].
inline double adaptive_threshold(std::span<const double> scores) {
  if (scores.empty()) {
    throw std::invalid_argument("adaptive_threshold: empty score set");
  }
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw std::invalid_argument("adaptive_threshold: score outside [0, 1]");
    }
  }
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  if (sorted.size() == 1) {
    return sorted.front();
  }
  std::size_t best = 0;
  double best_drop = sorted[1] - sorted[0];
  for (std::size_t j = 1; j + 1 < sorted.size(); ++j) {
    const double drop = sorted[j + 1] - sorted[j];
    if (drop < best_drop) {
      best_drop = drop;
      best = j;
    }
  }
  return sorted[best];
}

/// How one frame's detections get divided into high/low confidence sets.
struct SplitMode {
  enum class Kind { Adaptive, Fixed };

  Kind kind = Kind::Adaptive;
  double fixed_threshold = 0.6;  ///< used when kind == Fixed
  /// Adaptive only: the steepest drop must span at least this much,
  /// otherwise the score curve is considered unbroken and every detection
  /// stays high (threshold reported as the minimum score). Prevents a
  /// near-uniform score set from being split down the middle.
  double min_gap = 0.1;
  /// Adaptive only: the computed threshold is clamped into [band_lo,
  /// band_hi]. Defaults are neutral; tighten to bound how aggressive the
  /// split may get.
  double band_lo = 0.0;
  double band_hi = 1.0;

  static SplitMode adaptive(double min_gap = 0.1) {
    SplitMode m;
    m.kind = Kind::Adaptive;
    m.min_gap = min_gap;
    return m;
  }
  static SplitMode fixed(double threshold) {
    SplitMode m;
    m.kind = Kind::Fixed;
    m.fixed_threshold = threshold;
    m.min_gap = 0.0;
    return m;
  }
};

/// Result of splitting one frame. `high`/`low` hold indices into the input
/// vector, each preserving input order; together they partition the input.
/// Every index in `high` has score >= threshold, everything in `low` is
/// strictly below.
struct ConfidenceSplit {
  double threshold = 1.0;
  std::vector<std::size_t> high;
  std::vector<std::size_t> low;
};

inline ConfidenceSplit split_detections(const std::vector<Detection>& dets,
                                        const SplitMode& mode) {
  ConfidenceSplit out;
  if (dets.empty()) {
    out.threshold = 1.0;
    return out;
  }
  if (mode.kind == SplitMode::Kind::Fixed) {
    out.threshold = mode.fixed_threshold;
  } else {
    // Single-sort equivalent of adaptive_threshold() plus the min_gap
    // guard; this sits on the per-frame hot path.
    std::vector<double> scores;
    scores.reserve(dets.size());
    for (const auto& d : dets) {
      if (!(d.score >= 0.0 && d.score <= 1.0)) {
        throw std::invalid_argument("split_detections: score outside [0, 1]");
      }
      scores.push_back(d.score);
    }
    std::sort(scores.begin(), scores.end(), std::greater<>());
    if (scores.size() == 1) {
      out.threshold = scores.front();
    } else {
      std::size_t best = 0;
      double best_drop = scores[1] - scores[0];
      for (std::size_t j = 1; j + 1 < scores.size(); ++j) {
        const double drop = scores[j + 1] - scores[j];
        if (drop < best_drop) {
          best_drop = drop;
          best = j;
        }
      }
      // Guard against splitting an unbroken curve: only honour the steepest
      // drop when it is at least min_gap deep, else keep everything high.
      out.threshold = -best_drop < mode.min_gap ? scores.back() : scores[best];
    }
    out.threshold = std::clamp(out.threshold, mode.band_lo, mode.band_hi);
  }
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (dets[i].score >= out.threshold) {
      out.high.push_back(i);
    } else {
      out.low.push_back(i);
    }
  }
  return out;
}

}  // namespace byteadapt
