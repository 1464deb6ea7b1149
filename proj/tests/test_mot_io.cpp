#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "byteadapt/mot_io.hpp"

using namespace byteadapt;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("byteadapt_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

fs::path write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("detections parse fields and index by frame") {
  TempDir tmp;
  const auto file = write_text(tmp.path / "det.txt",
                               "1,-1,10,20,30,40,0.9\n"
                               "3,-1,50.5,60.25,70,80,0.45,-1,-1,-1\n");
  SequenceData parsed = read_detections(file.string());
  CHECK(parsed.frame_count == 3);
  CHECK(parsed.clamped_scores == 0);
  REQUIRE(parsed.detections_by_frame.size() == 3);  // frame 2 materialized empty
  CHECK(parsed.detections_by_frame.at(2).empty());

  REQUIRE(parsed.detections_by_frame.at(1).size() == 1);
  const Detection& d1 = parsed.detections_by_frame.at(1)[0];
  CHECK(d1.frame == 1);
  CHECK(d1.bbox.left == 10.0);
  CHECK(d1.bbox.top == 20.0);
  CHECK(d1.bbox.width == 30.0);
  CHECK(d1.bbox.height == 40.0);
  CHECK(d1.score == 0.9);
  CHECK(d1.source_line == 1);

  REQUIRE(parsed.detections_by_frame.at(3).size() == 1);
  CHECK(parsed.detections_by_frame.at(3)[0].bbox.top == 60.25);
  CHECK(parsed.detections_by_frame.at(3)[0].score == 0.45);
}

TEST_CASE("out-of-range scores are clamped and counted") {
  TempDir tmp;
  const auto file = write_text(tmp.path / "det.txt",
                               "1,-1,0,0,10,10,1.7\n"
                               "1,-1,20,0,10,10,-0.2\n"
                               "1,-1,40,0,10,10,0.5\n");
  SequenceData parsed = read_detections(file.string());
  CHECK(parsed.clamped_scores == 2);
  CHECK(parsed.detections_by_frame.at(1)[0].score == 1.0);
  CHECK(parsed.detections_by_frame.at(1)[1].score == 0.0);
  CHECK(parsed.detections_by_frame.at(1)[2].score == 0.5);
}

TEST_CASE("detection parse errors carry file and line") {
  TempDir tmp;
  SECTION("too few fields") {
    const auto file = write_text(tmp.path / "det.txt",
                                 "1,-1,0,0,10,10,0.5\n"
                                 "1,-1,0,0,10\n");
    try {
      read_detections(file.string());
      FAIL("expected parse failure");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
  }
  SECTION("unparsable number") {
    const auto file =
        write_text(tmp.path / "det.txt", "1,-1,zero,0,10,10,0.5\n");
    CHECK_THROWS_AS(read_detections(file.string()), std::runtime_error);
  }
  SECTION("frame below one") {
    const auto file = write_text(tmp.path / "det.txt", "0,-1,0,0,10,10,0.5\n");
    CHECK_THROWS_AS(read_detections(file.string()), std::runtime_error);
  }
  SECTION("missing file") {
    CHECK_THROWS_AS(read_detections((tmp.path / "absent.txt").string()),
                    std::runtime_error);
  }
}

TEST_CASE("blank lines and CRLF endings are tolerated") {
  TempDir tmp;
  const auto file = write_text(tmp.path / "det.txt",
                               "1,-1,10,20,30,40,0.9\r\n"
                               "\r\n"
                               "2,-1,11,21,30,40,0.8\r\n");
  SequenceData parsed = read_detections(file.string());
  CHECK(parsed.frame_count == 2);
  CHECK(parsed.detections_by_frame.at(1).size() == 1);
  CHECK(parsed.detections_by_frame.at(2)[0].bbox.left == 11.0);
}

TEST_CASE("empty detection file yields an empty zero-frame result") {
  TempDir tmp;
  const auto file = write_text(tmp.path / "det.txt", "");
  SequenceData parsed = read_detections(file.string());
  CHECK(parsed.frame_count == 0);
  CHECK(parsed.detections_by_frame.empty());
}

TEST_CASE("ground truth keeps only flagged pedestrian rows") {
  TempDir tmp;
  std::string text;
  // Ten rows; rows 3 and 7 have flag 0, row 5 has class 2: seven survive.
  for (int i = 1; i <= 10; ++i) {
    const int flag = (i == 3 || i == 7) ? 0 : 1;
    const int cls = (i == 5) ? 2 : 1;
    text += std::to_string(i) + "," + std::to_string(i) + ",10,20,30,40," +
            std::to_string(flag) + "," + std::to_string(cls) + ",0.75\n";
  }
  const auto file = write_text(tmp.path / "gt.txt", text);
  GroundTruthMap gt = read_ground_truth(file.string());
  std::size_t kept = 0;
  for (const auto& [frame, entries] : gt) kept += entries.size();
  CHECK(kept == 7);
  CHECK(!gt.contains(3));
  CHECK(!gt.contains(5));
  CHECK(!gt.contains(7));
  REQUIRE(gt.contains(1));
  CHECK(gt.at(1)[0].id == 1);
  CHECK(gt.at(1)[0].visibility == 0.75);
  CHECK(gt.at(1)[0].bbox.width == 30.0);
}

TEST_CASE("ground truth retains duplicate ids within a frame") {
  TempDir tmp;
  const auto file = write_text(tmp.path / "gt.txt",
                               "1,4,10,20,30,40,1,1,1.0\n"
                               "1,4,100,20,30,40,1,1,1.0\n");
  GroundTruthMap gt = read_ground_truth(file.string());
  REQUIRE(gt.at(1).size() == 2);
  CHECK(gt.at(1)[0].id == 4);
  CHECK(gt.at(1)[1].id == 4);
}

TEST_CASE("results are written with the frozen format") {
  std::vector<FrameResult> results(1);
  results[0].frame = 1;
  results[0].outputs.push_back(TrackOutput{1, BBox{10, 20, 30, 40}, 0.9});
  CHECK(format_results(results) == "1,1,10.00,20.00,30.00,40.00,0.900000,-1,-1,-1\n");

  results[0].outputs.push_back(
      TrackOutput{12, BBox{1.005, 2.5, 3.25, 4.125}, 0.123456});
  const std::string two = format_results(results);
  CHECK(two ==
        "1,1,10.00,20.00,30.00,40.00,0.900000,-1,-1,-1\n"
        "1,12,1.00,2.50,3.25,4.12,0.123456,-1,-1,-1\n");
}

TEST_CASE("write then read then write is byte identical") {
  TempDir tmp;
  std::mt19937_64 rng(20260823);
  auto uniform = [&rng] {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  std::vector<FrameResult> results;
  int id = 0;
  for (int f = 1; f <= 25; ++f) {
    FrameResult fr;
    fr.frame = f;
    for (int i = 0; i < 4; ++i) {
      fr.outputs.push_back(TrackOutput{
          ++id, BBox{1000.0 * uniform(), 600.0 * uniform(),
                     5.0 + 80.0 * uniform(), 5.0 + 120.0 * uniform()},
          uniform()});
    }
    results.push_back(std::move(fr));
  }
  const auto first = tmp.path / "a.txt";
  write_results(first.string(), results);
  const ResultsMap re_read = read_results(first.string());
  std::vector<FrameResult> round;
  for (const auto& [frame, outs] : re_read) {
    round.push_back(FrameResult{frame, outs});
  }
  const auto second = tmp.path / "b.txt";
  write_results(second.string(), round);
  CHECK(slurp(first) == slurp(second));
  CHECK(slurp(first).size() > 100);
}

TEST_CASE("writing twice produces identical bytes and no temp litter") {
  TempDir tmp;
  std::vector<FrameResult> results(1);
  results[0].frame = 1;
  results[0].outputs.push_back(TrackOutput{7, BBox{1, 2, 3, 4}, 0.25});
  const auto target = tmp.path / "nested" / "out.txt";
  write_results(target.string(), results);
  const std::string a = slurp(target);
  write_results(target.string(), results);
  CHECK(slurp(target) == a);
  std::size_t entries = 0;
  for (const auto& e : fs::directory_iterator(target.parent_path())) {
    (void)e;
    ++entries;
  }
  CHECK(entries == 1);
}

TEST_CASE("empty results write an empty file") {
  TempDir tmp;
  const auto target = tmp.path / "empty.txt";
  write_results(target.string(), {});
  CHECK(fs::exists(target));
  CHECK(slurp(target).empty());
}

TEST_CASE("seqinfo round trips name length and rate") {
  TempDir tmp;
  const auto file = tmp.path / "seqinfo.ini";
  SeqInfo info;
  info.name = "synthetic-01";
  info.seq_length = 200;
  info.frame_rate = 30;
  write_seqinfo(file.string(), info);
  const SeqInfo back = read_seqinfo(file.string());
  CHECK(back.name == "synthetic-01");
  CHECK(back.seq_length == 200);
  CHECK(back.frame_rate == 30);
}

TEST_CASE("seqinfo parser survives unknown keys and spacing") {
  TempDir tmp;
  const auto file = write_text(tmp.path / "seqinfo.ini",
                               "[Sequence]\n"
                               "name = demo\n"
                               "imDir=img1\n"
                               "frameRate= 25\n"
                               "seqLength =42\n"
                               "imWidth=1920\n");
  const SeqInfo info = read_seqinfo(file.string());
  CHECK(info.name == "demo");
  CHECK(info.seq_length == 42);
  CHECK(info.frame_rate == 25);
}

TEST_CASE("load_sequence assembles det gt and seqinfo") {
  TempDir tmp;
  const auto seq = tmp.path / "seq-a";
  fs::create_directories(seq / "det");
  fs::create_directories(seq / "gt");
  write_text(seq / "det" / "det.txt",
             "1,-1,10,20,30,40,0.9\n2,-1,11,20,30,40,0.8\n");
  write_text(seq / "gt" / "gt.txt", "1,1,10,20,30,40,1,1,1.0\n");
  write_text(seq / "seqinfo.ini",
             "[Sequence]\nname=seq-a\nseqLength=5\nframeRate=30\n");
  const SequenceData data = load_sequence(seq.string());
  CHECK(data.name == "seq-a");
  CHECK(data.frame_count == 5);  // seqinfo extends past the last detection
  CHECK(data.frame_rate == 30);
  CHECK(data.detections_by_frame.at(1).size() == 1);
  CHECK(data.ground_truth_by_frame.at(1).size() == 1);
}

TEST_CASE("load_sequence works without gt or seqinfo") {
  TempDir tmp;
  const auto seq = tmp.path / "bare";
  fs::create_directories(seq / "det");
  write_text(seq / "det" / "det.txt", "4,-1,10,20,30,40,0.9\n");
  const SequenceData data = load_sequence(seq.string());
  CHECK(data.name == "bare");
  CHECK(data.frame_count == 4);
  CHECK(data.ground_truth_by_frame.empty());
  CHECK_THROWS_AS(load_sequence((tmp.path / "nothing").string()),
                  std::runtime_error);
}

TEST_CASE("discover_sequences finds det directories in sorted order") {
  TempDir tmp;
  for (const char* name : {"zeta", "alpha", "mid"}) {
    fs::create_directories(tmp.path / name / "det");
    write_text(tmp.path / name / "det" / "det.txt", "1,-1,0,0,10,10,0.5\n");
  }
  fs::create_directories(tmp.path / "not_a_seq");
  const auto found = discover_sequences(tmp.path.string());
  REQUIRE(found.size() == 3);
  CHECK(found[0] == "alpha");
  CHECK(found[1] == "mid");
  CHECK(found[2] == "zeta");
}

TEST_CASE("ground truth writer round trips through the reader") {
  TempDir tmp;
  GroundTruthMap gt;
  gt[1] = {GtEntry{1, BBox{10, 20, 30, 40}, 1.0},
           GtEntry{2, BBox{50.5, 60.25, 70, 80}, 0.4}};
  gt[2] = {GtEntry{1, BBox{12, 20, 30, 40}, 1.0}};
  const auto file = tmp.path / "gt.txt";
  write_ground_truth(file.string(), gt);
  const GroundTruthMap back = read_ground_truth(file.string());
  REQUIRE(back.size() == 2);
  REQUIRE(back.at(1).size() == 2);
  CHECK(back.at(1)[1].id == 2);
  CHECK(back.at(1)[1].bbox.left == 50.5);
  CHECK(back.at(1)[1].visibility == 0.4);
}

TEST_CASE("detection writer round trips through the reader") {
  TempDir tmp;
  std::map<int, std::vector<Detection>> original;
  original[1] = {Detection{1, BBox{10, 20, 30, 40}, 0.9, -1}};
  original[2] = {Detection{2, BBox{11.5, 21, 30, 40}, 0.85, -1}};
  const auto file = tmp.path / "det.txt";
  write_detections(file.string(), original);
  const SequenceData back = read_detections(file.string());
  CHECK(back.frame_count == 2);
  CHECK(back.detections_by_frame.at(2)[0].bbox.left == 11.5);
  CHECK(back.detections_by_frame.at(2)[0].score == 0.85);
}
