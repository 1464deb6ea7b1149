#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>

#include "byteadapt/synth.hpp"
#include "byteadapt/threshold.hpp"

using namespace byteadapt;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("byteadapt_synth_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ScenarioSpec tiny_spec() {
  ScenarioSpec spec;
  spec.seed = 5;
  spec.n_objects = 2;
  spec.frames = 10;
  spec.motion.push_back(ObjectMotion{BBox{100, 100, 50, 100}, 2.0, 0.0});
  spec.motion.push_back(ObjectMotion{BBox{600, 400, 60, 120}, -1.5, 0.5});
  return spec;
}

}  // namespace

TEST_CASE("identical spec and seed reproduce identical streams") {
  ScenarioSpec spec = preset("mot20-like");
  spec.seed = 42;
  const Scenario a = generate(spec);
  const Scenario b = generate(spec);
  REQUIRE(a.detections.size() == b.detections.size());
  for (const auto& [f, dets] : a.detections) {
    const auto& other = b.detections.at(f);
    REQUIRE(dets.size() == other.size());
    for (std::size_t i = 0; i < dets.size(); ++i) {
      CHECK(dets[i].bbox.left == other[i].bbox.left);
      CHECK(dets[i].bbox.top == other[i].bbox.top);
      CHECK(dets[i].bbox.width == other[i].bbox.width);
      CHECK(dets[i].bbox.height == other[i].bbox.height);
      CHECK(dets[i].score == other[i].score);
    }
  }
  ScenarioSpec reseeded = spec;
  reseeded.seed = 43;
  const Scenario c = generate(reseeded);
  bool any_difference = false;
  for (const auto& [f, dets] : a.detections) {
    const auto& other = c.detections.at(f);
    if (dets.size() != other.size()) {
      any_difference = true;
      break;
    }
    for (std::size_t i = 0; i < dets.size(); ++i) {
      if (dets[i].bbox.left != other[i].bbox.left ||
          dets[i].score != other[i].score) {
        any_difference = true;
        break;
      }
    }
  }
  CHECK(any_difference);
}

TEST_CASE("noise-free generation reproduces ground truth boxes") {
  ScenarioSpec spec = tiny_spec();  // noise 0, detect_prob 1, no clutter
  const Scenario s = generate(spec);
  REQUIRE(s.ground_truth.size() == 10);
  for (const auto& [f, entries] : s.ground_truth) {
    const auto& dets = s.detections.at(f);
    REQUIRE(dets.size() == entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
      CHECK(dets[i].bbox.left == entries[i].bbox.left);
      CHECK(dets[i].bbox.top == entries[i].bbox.top);
      CHECK(dets[i].bbox.width == entries[i].bbox.width);
      CHECK(dets[i].bbox.height == entries[i].bbox.height);
      CHECK(dets[i].score >= 0.8);
      CHECK(dets[i].score < 1.0);
    }
  }
  // Linear motion check on object 1: left = 100 + 2*(f-1).
  CHECK(s.ground_truth.at(1)[0].bbox.left == 100.0);
  CHECK(s.ground_truth.at(7)[0].bbox.left == 112.0);
  CHECK(s.ground_truth.at(7)[0].id == 1);
  CHECK(s.ground_truth.at(7)[1].id == 2);
}

TEST_CASE("occlusion windows override scores and visibility") {
  ScenarioSpec spec = tiny_spec();
  spec.occlusion_windows = {{0, 4, 6, 0.30, 0.45}};
  const Scenario s = generate(spec);
  for (int f = 1; f <= 10; ++f) {
    const bool in_window = f >= 4 && f <= 6;
    CHECK(s.ground_truth.at(f)[0].visibility == (in_window ? 0.4 : 1.0));
    CHECK(s.ground_truth.at(f)[1].visibility == 1.0);
    const double score = s.detections.at(f)[0].score;
    if (in_window) {
      CHECK(score >= 0.30);
      CHECK(score <= 0.45);
    } else {
      CHECK(score >= 0.8);
    }
  }
}

TEST_CASE("clutter volume tracks the poisson rate") {
  ScenarioSpec spec = tiny_spec();
  spec.frames = 100;
  spec.clutter_rate = 2.0;
  const Scenario s = generate(spec);
  long long clutter = 0;
  for (const auto& [f, dets] : s.detections) {
    // True objects are always detected here; the remainder is clutter.
    clutter += static_cast<long long>(dets.size()) - 2;
    for (std::size_t i = 2; i < dets.size(); ++i) {
      CHECK(dets[i].score >= 0.05);
      CHECK(dets[i].score <= 0.3);
    }
  }
  CHECK(clutter > 140);   // expectation 200; generous tolerance, fixed seed
  CHECK(clutter < 260);
}

TEST_CASE("missed detections follow detect_prob") {
  ScenarioSpec spec = tiny_spec();
  spec.frames = 400;
  spec.detect_prob = 0.75;
  const Scenario s = generate(spec);
  long long detections = 0;
  for (const auto& [f, dets] : s.detections) {
    detections += static_cast<long long>(dets.size());
  }
  // 800 opportunities at p = 0.75: expectation 600, sd ~12.
  CHECK(detections > 540);
  CHECK(detections < 660);
}

TEST_CASE("presets pin their headline shape") {
  const ScenarioSpec clean = preset("clean");
  CHECK(clean.n_objects == 10);
  CHECK(clean.frames == 200);
  CHECK(clean.motion.size() == 10);
  CHECK(clean.occlusion_windows.empty());
  CHECK(clean.clutter_rate == 0.0);

  const ScenarioSpec dip = preset("occlusion-dip");
  REQUIRE(dip.occlusion_windows.size() == 3);
  CHECK(dip.occlusion_windows[0].object == 7);
  CHECK(dip.occlusion_windows[0].first_frame == 55);
  CHECK(dip.occlusion_windows[0].last_frame == 69);
  CHECK(dip.occlusion_windows[2].object == 9);
  // The dip preset shares the clean preset's geometry exactly.
  REQUIRE(dip.motion.size() == clean.motion.size());
  for (std::size_t i = 0; i < dip.motion.size(); ++i) {
    CHECK(dip.motion[i].start.left == clean.motion[i].start.left);
    CHECK(dip.motion[i].start.top == clean.motion[i].start.top);
    CHECK(dip.motion[i].start.width == clean.motion[i].start.width);
    CHECK(dip.motion[i].start.height == clean.motion[i].start.height);
    CHECK(dip.motion[i].vx == clean.motion[i].vx);
    CHECK(dip.motion[i].vy == clean.motion[i].vy);
  }

  const ScenarioSpec clutter = preset("dense-clutter");
  CHECK(clutter.n_objects == 20);
  CHECK(clutter.clutter_rate == 10.0);

  const ScenarioSpec crowd = preset("mot20-like");
  CHECK(crowd.n_objects == 24);
  CHECK(crowd.frames == 150);
  CHECK(crowd.detect_prob == 0.97);
  CHECK(crowd.occlusion_windows.size() == 4);

  CHECK_THROWS_AS(preset("bogus"), std::invalid_argument);
}

TEST_CASE("wall stoppers pin against the right wall on schedule") {
  ScenarioSpec spec = preset("clean");
  spec.seed = 7;
  const Scenario s = generate(spec);
  // Object index 7 (gt id 8) has width 49 and hits the wall at frame 60.
  const double wall_left = 1920.0 - 49.0;
  CHECK(s.ground_truth.at(59)[7].bbox.left == wall_left - 8.0);
  for (int f = 60; f <= 200; ++f) {
    CHECK(s.ground_truth.at(f)[7].bbox.left == wall_left);
  }
  CHECK(s.ground_truth.at(60)[7].id == 8);
}

TEST_CASE("the dip preset separates cleanly under the adaptive split") {
  // Inside an occlusion window the score gap between the occluded object
  // (<= 0.5) and everything else (>= 0.8) dominates any within-band gap,
  // so the adaptive split must isolate exactly the occluded detection.
  ScenarioSpec spec = preset("occlusion-dip");
  spec.seed = 7;
  const Scenario s = generate(spec);
  int window_frames = 0;
  for (const auto& w : spec.occlusion_windows) {
    for (int f = w.first_frame; f <= w.last_frame; ++f) {
      ++window_frames;
      const auto& dets = s.detections.at(f);
      const ConfidenceSplit split =
          split_detections(dets, SplitMode::adaptive());
      REQUIRE(split.low.size() == 1);
      CHECK(dets[split.low[0]].score <= 0.5);
      CHECK(split.threshold >= 0.8);
      for (const std::size_t hi : split.high) {
        CHECK(dets[hi].score >= 0.8);
      }
    }
  }
  CHECK(window_frames == 45);
}

TEST_CASE("spec validation rejects inconsistent inputs") {
  ScenarioSpec spec = tiny_spec();
  spec.frames = 0;
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
  spec = tiny_spec();
  spec.motion.pop_back();
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
  spec = tiny_spec();
  spec.detect_prob = 1.5;
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
  spec = tiny_spec();
  spec.noise_sigma = -1.0;
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
  spec = tiny_spec();
  spec.occlusion_windows = {{5, 1, 2, 0.1, 0.2}};
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
  spec = tiny_spec();
  spec.occlusion_windows = {{0, 8, 4, 0.1, 0.2}};
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
  spec = tiny_spec();
  spec.occlusion_windows = {{0, 1, 2, 0.5, 0.2}};
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
  spec = tiny_spec();
  spec.true_score_range = {0.5, 1.2};
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
  spec = tiny_spec();
  spec.motion[0].start.width = 0.0;
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
}

TEST_CASE("zero objects is a valid empty scenario") {
  ScenarioSpec spec;
  spec.n_objects = 0;
  spec.frames = 5;
  const Scenario s = generate(spec);
  for (int f = 1; f <= 5; ++f) {
    CHECK(s.detections.at(f).empty());
    CHECK(s.ground_truth.at(f).empty());
  }
}

TEST_CASE("write_scenario lays out a loadable sequence directory") {
  TempDir tmp;
  ScenarioSpec spec = tiny_spec();
  spec.noise_sigma = 1.0;
  const Scenario s = generate(spec);
  const auto dir = tmp.path / "tiny-seq";
  write_scenario(dir.string(), spec, s);
  CHECK(fs::exists(dir / "det" / "det.txt"));
  CHECK(fs::exists(dir / "gt" / "gt.txt"));
  CHECK(fs::exists(dir / "seqinfo.ini"));

  const SequenceData data = load_sequence(dir.string());
  CHECK(data.name == "tiny-seq");
  CHECK(data.frame_count == 10);
  CHECK(data.detections_by_frame.at(1).size() == 2);
  CHECK(data.ground_truth_by_frame.at(10).size() == 2);

  // Writing the loaded data back reproduces the files byte for byte.
  const auto again = tmp.path / "tiny-seq-2";
  fs::create_directories(again / "det");
  fs::create_directories(again / "gt");
  write_detections((again / "det" / "det.txt").string(),
                   data.detections_by_frame);
  write_ground_truth((again / "gt" / "gt.txt").string(),
                     data.ground_truth_by_frame);
  CHECK(slurp(dir / "det" / "det.txt") == slurp(again / "det" / "det.txt"));
  CHECK(slurp(dir / "gt" / "gt.txt") == slurp(again / "gt" / "gt.txt"));
}
