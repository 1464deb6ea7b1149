#pragma once

#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "byteadapt/assignment.hpp"
#include "byteadapt/geometry.hpp"
#include "byteadapt/mot_io.hpp"

namespace byteadapt {

struct EvalReport {
  double mota = 0.0;
  double idf1 = 0.0;
  long long fp = 0;
  long long fn = 0;
  long long id_switches = 0;
  long long fragmentations = 0;
  int mostly_tracked = 0;
  int mostly_lost = 0;
  long long gt_count = 0;
  /// Reserved for a future higher-order metric; evaluate() never sets it,
  /// so report consumers must treat absence as "not computed".
  std::optional<double> hota;
};

/// CLEAR MOT + IDF1 evaluation of tracker output against ground truth.
///
/// Per frame, ground truth and hypotheses are matched on IoU with the gate
/// (default 0.5): pairs matched in the previous frame are kept first
/// whenever still within gate (continuity preference), then the remainder
/// is matched by gated min-cost assignment on 1 - IoU. Misses, false
/// positives, identity switches and fragmentations accumulate from that
/// matching; MOTA = 1 - (FP + FN + IDSW) / gt_count.
///
/// A trajectory counts as mostly tracked when matched on at least 80% of
/// the frames it appears in, mostly lost at 20% or less. A fragmentation is
/// every matched -> unmatched -> matched transition over a trajectory's
/// present frames. Identity switches compare against the last matched
/// hypothesis id, however long ago that was.
///
/// IDF1 finds the global gt-id/track-id pairing that maximizes the number
/// of identity-consistent matches (frames where the paired boxes overlap at
/// the gate), then scores IDF1 = 2*IDTP / (2*IDTP + IDFP + IDFN).
///
/// Throws std::invalid_argument when the ground truth is empty (MOTA is
/// undefined) or the gate lies outside (0, 1].
inline EvalReport evaluate(const GroundTruthMap& gt, const ResultsMap& results,
                           double iou_gate = 0.5) {
  if (!(iou_gate > 0.0 && iou_gate <= 1.0)) {
    throw std::invalid_argument("evaluate: iou_gate must lie in (0, 1]");
  }
  EvalReport rep;
  for (const auto& [frame, entries] : gt) {
    rep.gt_count += static_cast<long long>(entries.size());
  }
  if (rep.gt_count == 0) {
    throw std::invalid_argument("evaluate: empty ground truth (MOTA undefined)");
  }

  std::set<int> frames;
  for (const auto& [f, _] : gt) frames.insert(f);
  for (const auto& [f, _] : results) frames.insert(f);

  std::map<int, int> last_match;          // gt id -> last matched hyp id
  std::map<int, long long> gt_present;    // gt id -> frames present
  std::map<int, long long> gt_matched;    // gt id -> frames matched
  std::map<int, char> in_gap;             // gt id -> unmatched since a match
  std::map<std::pair<int, int>, long long> overlap;  // (gt id, hyp id) -> frames
  long long total_hyp = 0;

  static const std::vector<GtEntry> kNoGt;
  static const std::vector<TrackOutput> kNoHyp;
  for (int f : frames) {
    const auto git = gt.find(f);
    const auto rit = results.find(f);
    const std::vector<GtEntry>& g = git == gt.end() ? kNoGt : git->second;
    const std::vector<TrackOutput>& h = rit == results.end() ? kNoHyp : rit->second;
    total_hyp += static_cast<long long>(h.size());

    // Identity-overlap tally for IDF1, independent of the CLEAR matching.
    for (const auto& ge : g) {
      for (const auto& he : h) {
        if (iou(ge.bbox, he.bbox) >= iou_gate) {
          ++overlap[{ge.id, he.id}];
        }
      }
    }

    std::vector<char> g_used(g.size(), 0), h_used(h.size(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> frame_matches;

    // Continuity: keep last frame's pairing wherever it still holds.
    for (std::size_t gi = 0; gi < g.size(); ++gi) {
      const auto lm = last_match.find(g[gi].id);
      if (lm == last_match.end()) {
        continue;
      }
      for (std::size_t hi = 0; hi < h.size(); ++hi) {
        if (!h_used[hi] && h[hi].id == lm->second) {
          if (iou(g[gi].bbox, h[hi].bbox) >= iou_gate) {
            g_used[gi] = 1;
            h_used[hi] = 1;
            frame_matches.emplace_back(gi, hi);
          }
          break;
        }
      }
    }

    // Global gated assignment over what is left.
    std::vector<std::size_t> g_rest, h_rest;
    for (std::size_t gi = 0; gi < g.size(); ++gi) {
      if (!g_used[gi]) g_rest.push_back(gi);
    }
    for (std::size_t hi = 0; hi < h.size(); ++hi) {
      if (!h_used[hi]) h_rest.push_back(hi);
    }
    CostMatrix cost(g_rest.size(), h_rest.size());
    for (std::size_t r = 0; r < g_rest.size(); ++r) {
      for (std::size_t c = 0; c < h_rest.size(); ++c) {
        cost.at(r, c) = 1.0 - iou(g[g_rest[r]].bbox, h[h_rest[c]].bbox);
      }
    }
    for (const auto& [r, c] : solve(cost, 1.0 - iou_gate).matches) {
      frame_matches.emplace_back(g_rest[r], h_rest[c]);
    }

    rep.fp += static_cast<long long>(h.size() - frame_matches.size());
    rep.fn += static_cast<long long>(g.size() - frame_matches.size());

    std::vector<char> g_matched_now(g.size(), 0);
    for (const auto& [gi, hi] : frame_matches) {
      g_matched_now[gi] = 1;
      const int gid = g[gi].id;
      const int hid = h[hi].id;
      const auto lm = last_match.find(gid);
      if (lm != last_match.end() && lm->second != hid) {
        ++rep.id_switches;
      }
      last_match[gid] = hid;
    }

    for (std::size_t gi = 0; gi < g.size(); ++gi) {
      const int gid = g[gi].id;
      ++gt_present[gid];
      if (g_matched_now[gi]) {
        ++gt_matched[gid];
        if (in_gap[gid]) {
          ++rep.fragmentations;
        }
        in_gap[gid] = 0;
      } else if (gt_matched.contains(gid) && gt_matched[gid] > 0) {
        in_gap[gid] = 1;
      }
    }
  }

  for (const auto& [gid, present] : gt_present) {
    const double ratio =
        static_cast<double>(gt_matched[gid]) / static_cast<double>(present);
    if (ratio >= 0.8) {
      ++rep.mostly_tracked;
    } else if (ratio <= 0.2) {
      ++rep.mostly_lost;
    }
  }

  rep.mota = 1.0 - static_cast<double>(rep.fp + rep.fn + rep.id_switches) /
                       static_cast<double>(rep.gt_count);

  // IDF1: maximize total overlap across a one-to-one id pairing. The
  // assignment solver minimizes cost, so feed it negated overlaps; a zero
  // gate keeps every pairing feasible without affecting the optimum.
  std::vector<int> gids, hids;
  for (const auto& [gid, _] : gt_present) gids.push_back(gid);
  {
    std::set<int> hset;
    for (const auto& [k, _] : overlap) hset.insert(k.second);
    for (const auto& [f, hs] : results) {
      for (const auto& he : hs) hset.insert(he.id);
    }
    hids.assign(hset.begin(), hset.end());
  }
  long long idtp = 0;
  if (!hids.empty()) {
    CostMatrix cost(gids.size(), hids.size());
    for (std::size_t r = 0; r < gids.size(); ++r) {
      for (std::size_t c = 0; c < hids.size(); ++c) {
        const auto it = overlap.find({gids[r], hids[c]});
        cost.at(r, c) =
            it == overlap.end() ? 0.0 : -static_cast<double>(it->second);
      }
    }
    for (const auto& [r, c] : solve(cost, 0.0).matches) {
      idtp += static_cast<long long>(-cost.at(r, c));
    }
  }
  rep.idf1 = static_cast<double>(2 * idtp) /
             static_cast<double>(rep.gt_count + total_hyp);
  return rep;
}

/// Machine-readable report: one metric=value per line, frozen key set.
inline std::string format_kv(const EvalReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "mota=%.6f\nidf1=%.6f\nfp=%lld\nfn=%lld\nidsw=%lld\nfrag=%lld\n"
                "mt=%d\nml=%d\ngt=%lld\n",
                r.mota, r.idf1, r.fp, r.fn, r.id_switches, r.fragmentations,
                r.mostly_tracked, r.mostly_lost, r.gt_count);
  return buf;
}

/// Human-readable report table.
inline std::string format_table(const EvalReport& r) {
  char buf[768];
  std::snprintf(buf, sizeof(buf),
                "%-18s %12s\n"
                "%-18s %12.6f\n%-18s %12.6f\n%-18s %12lld\n%-18s %12lld\n"
                "%-18s %12lld\n%-18s %12lld\n%-18s %12d\n%-18s %12d\n"
                "%-18s %12lld\n",
                "metric", "value", "MOTA", r.mota, "IDF1", r.idf1, "FP", r.fp,
                "FN", r.fn, "IDSW", r.id_switches, "Frag", r.fragmentations,
                "MT", r.mostly_tracked, "ML", r.mostly_lost, "GT", r.gt_count);
  return buf;
}

}  // namespace byteadapt
