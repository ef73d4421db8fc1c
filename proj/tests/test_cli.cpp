#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "beval/detection_eval.hpp"
#include "beval/mask.hpp"
#include "beval/panoptic_eval.hpp"

using namespace beval;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BEVAL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json slurp_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("beval_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

// Single-mask record with an RLE payload.
std::string mask_record(const BinaryMask& m) {
  const RleMask rle = encode_rle(m);
  nlohmann::json j;
  j["size"] = {rle.height, rle.width};
  j["counts"] = rle.counts;
  return j.dump();
}

BinaryMask block_mask(int frame, int r0, int c0, int h, int w) {
  BinaryMask m(frame, frame);
  for (int r = r0; r < r0 + h; ++r)
    for (int c = c0; c < c0 + w; ++c) m.set(r, c, true);
  return m;
}

std::string small_detection_gt() {
  DetectionDataset ds;
  ds.images = {{1, 64, 64}, {2, 64, 64}};
  ds.categories = {{1, "widget"}};
  auto add = [&](long long id, int img, const BinaryMask& m) {
    InstanceAnnotation a;
    a.id = id;
    a.image_id = img;
    a.category_id = 1;
    a.segmentation.rle = encode_rle(m);
    a.area = static_cast<double>(m.area());
    ds.annotations.push_back(a);
  };
  add(1, 1, block_mask(64, 4, 4, 20, 20));
  add(2, 1, block_mask(64, 34, 30, 18, 22));
  add(3, 2, block_mask(64, 10, 10, 30, 30));
  return detection_gt_to_json(ds).dump();
}

std::string gt_as_detections() {
  const auto ds = parse_detection_gt(nlohmann::json::parse(small_detection_gt()));
  std::vector<DetectionResult> dets;
  for (const auto& a : ds.annotations) {
    DetectionResult d;
    d.image_id = a.image_id;
    d.category_id = a.category_id;
    d.segmentation = a.segmentation;
    d.score = 1.0;
    dets.push_back(d);
  }
  return detections_to_json(dets).dump();
}

std::string small_panoptic_map() {
  std::map<int, PanopticLabelMap> maps;
  PanopticLabelMap m(16, 16);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) m.set_id(r, c, c < 7 ? 1 : 2);
  m.segments = {{1, 1, true}, {2, 2, false}};
  maps[1] = m;
  return panoptic_to_json(maps).dump();
}

}  // namespace

TEST_CASE("measure: identical masks score 1.0 everywhere") {
  TempDir dir;
  const BinaryMask m = block_mask(32, 8, 8, 12, 12);
  write_file(dir.path / "gt.json", mask_record(m));
  write_file(dir.path / "pred.json", mask_record(m));
  const fs::path out = dir.path / "report.json";
  REQUIRE(run_cli("measure --gt " + (dir.path / "gt.json").string() + " --pred " +
                  (dir.path / "pred.json").string() + " --out " + out.string()) == 0);
  const nlohmann::json j = slurp_json(out);
  for (const char* key : {"pixel_accuracy", "mask_iou", "trimap_iou", "f_measure",
                          "mf_measure", "boundary_iou", "combined_iou"})
    CHECK(j.at(key).get<double>() == 1.0);
  CHECK(j.at("provenance").at("tool") == "boundary_eval");
}

TEST_CASE("measure: huge dilation ratio collapses boundary IoU onto mask IoU") {
  TempDir dir;
  write_file(dir.path / "gt.json", mask_record(block_mask(32, 8, 8, 12, 12)));
  write_file(dir.path / "pred.json", mask_record(block_mask(32, 10, 11, 12, 12)));
  const fs::path out = dir.path / "report.json";
  REQUIRE(run_cli("measure --dilation-ratio 10 --gt " + (dir.path / "gt.json").string() +
                  " --pred " + (dir.path / "pred.json").string() + " --out " +
                  out.string()) == 0);
  const nlohmann::json j = slurp_json(out);
  CHECK(j.at("boundary_iou").get<double>() ==
        doctest::Approx(j.at("mask_iou").get<double>()).epsilon(1e-12));
}

TEST_CASE("measure: boundary defect scores below mask IoU") {
  TempDir dir;
  // Prediction reproduces the block but with a chewed-up edge strip.
  const BinaryMask gt = block_mask(64, 10, 10, 40, 40);
  BinaryMask pred = gt;
  for (int r = 10; r < 50; r += 2)
    for (int c = 46; c < 50; ++c) pred.set(r, c, false);
  write_file(dir.path / "gt.json", mask_record(gt));
  write_file(dir.path / "pred.json", mask_record(pred));
  const fs::path out = dir.path / "report.json";
  REQUIRE(run_cli("measure --gt " + (dir.path / "gt.json").string() + " --pred " +
                  (dir.path / "pred.json").string() + " --out " + out.string()) == 0);
  const nlohmann::json j = slurp_json(out);
  const double miou = j.at("mask_iou").get<double>();
  const double biou = j.at("boundary_iou").get<double>();
  CHECK(biou < miou);
  CHECK(biou > 0.0);
  CHECK(miou < 1.0);
}

TEST_CASE("measure: cityscapes preset and malformed input handling") {
  TempDir dir;
  write_file(dir.path / "gt.json", mask_record(block_mask(32, 8, 8, 12, 12)));
  write_file(dir.path / "pred.json", mask_record(block_mask(32, 8, 8, 12, 12)));
  const fs::path out = dir.path / "report.json";
  REQUIRE(run_cli("measure --dilation-ratio cityscapes --gt " +
                  (dir.path / "gt.json").string() + " --pred " +
                  (dir.path / "pred.json").string() + " --out " + out.string()) == 0);
  CHECK(slurp_json(out).at("provenance").at("config").at("dilation_ratio").get<double>() ==
        0.005);

  // Frame mismatch: nonzero exit, and no partial output file left behind.
  write_file(dir.path / "bad.json", mask_record(BinaryMask(16, 16, 1)));
  const fs::path out2 = dir.path / "report2.json";
  CHECK(run_cli("measure --gt " + (dir.path / "gt.json").string() + " --pred " +
                (dir.path / "bad.json").string() + " --out " + out2.string()) != 0);
  CHECK_FALSE(fs::exists(out2));

  write_file(dir.path / "garbage.json", "{\"size\": [4, 4]}");
  CHECK(run_cli("measure --gt " + (dir.path / "garbage.json").string() + " --pred " +
                (dir.path / "pred.json").string() + " --out " + out2.string()) != 0);
}

TEST_CASE("eval-ap: GT echoed as detections is perfect; empty detections score 0") {
  TempDir dir;
  write_file(dir.path / "gt.json", small_detection_gt());
  write_file(dir.path / "det.json", gt_as_detections());
  write_file(dir.path / "empty.json", "[]");

  const fs::path out = dir.path / "ap.json";
  REQUIRE(run_cli("eval-ap --measure both --gt " + (dir.path / "gt.json").string() +
                  " --pred " + (dir.path / "det.json").string() + " --out " +
                  out.string()) == 0);
  const nlohmann::json j = slurp_json(out);
  CHECK(j.at("mask").at("ap").get<double>() == doctest::Approx(1.0));
  CHECK(j.at("boundary").at("ap").get<double>() == doctest::Approx(1.0));
  CHECK(j.at("provenance").at("config").contains("d_per_image"));

  const fs::path out0 = dir.path / "ap0.json";
  REQUIRE(run_cli("eval-ap --measure mask --gt " + (dir.path / "gt.json").string() +
                  " --pred " + (dir.path / "empty.json").string() + " --out " +
                  out0.string()) == 0);
  CHECK(slurp_json(out0).at("mask").at("ap").get<double>() == doctest::Approx(0.0));
}

TEST_CASE("eval-pq: identical maps are perfect under both measures") {
  TempDir dir;
  write_file(dir.path / "gt.json", small_panoptic_map());
  write_file(dir.path / "pred.json", small_panoptic_map());
  const fs::path out = dir.path / "pq.json";
  REQUIRE(run_cli("eval-pq --measure both --gt " + (dir.path / "gt.json").string() +
                  " --pred " + (dir.path / "pred.json").string() + " --out " +
                  out.string()) == 0);
  const nlohmann::json j = slurp_json(out);
  for (const char* measure : {"mask", "boundary"}) {
    CHECK(j.at(measure).at("overall").at("pq").get<double>() == doctest::Approx(1.0));
    CHECK(j.at(measure).at("overall").at("sq").get<double>() == doctest::Approx(1.0));
    CHECK(j.at(measure).at("overall").at("rq").get<double>() == doctest::Approx(1.0));
  }
}

TEST_CASE("simulate: severity 0 reproduces GT; seeds give byte-identical files") {
  TempDir dir;
  write_file(dir.path / "gt.json", small_detection_gt());

  const fs::path out0 = dir.path / "sim0.json";
  REQUIRE(run_cli("simulate --error scale_dilation --severity 0 --seed 5 --gt " +
                  (dir.path / "gt.json").string() + " --out " + out0.string()) == 0);
  const auto dets = parse_detections(slurp_json(out0));
  const auto ds = parse_detection_gt(nlohmann::json::parse(small_detection_gt()));
  REQUIRE(dets.size() == ds.annotations.size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    CHECK(dets[i].score == 1.0);
    CHECK(dets[i].segmentation.decode(64, 64) ==
          ds.annotations[i].segmentation.decode(64, 64));
  }

  const fs::path outa = dir.path / "sim_a.json";
  const fs::path outb = dir.path / "sim_b.json";
  for (const fs::path& p : {outa, outb})
    REQUIRE(run_cli("simulate --error inner_mask --severity 3 --seed 9 --gt " +
                    (dir.path / "gt.json").string() + " --out " + p.string()) == 0);
  CHECK(slurp(outa) == slurp(outb));

  // Different seed: different content.
  const fs::path outc = dir.path / "sim_c.json";
  REQUIRE(run_cli("simulate --error inner_mask --severity 3 --seed 10 --gt " +
                  (dir.path / "gt.json").string() + " --out " + outc.string()) == 0);
  CHECK(slurp(outa) != slurp(outc));
}

TEST_CASE("simulate then eval-ap: dilation severity 5 drags AP below 1") {
  TempDir dir;
  write_file(dir.path / "gt.json", small_detection_gt());
  const fs::path sim = dir.path / "sim.json";
  REQUIRE(run_cli("simulate --error scale_dilation --severity 5 --seed 1 --gt " +
                  (dir.path / "gt.json").string() + " --out " + sim.string()) == 0);
  const fs::path out = dir.path / "ap.json";
  REQUIRE(run_cli("eval-ap --measure both --gt " + (dir.path / "gt.json").string() +
                  " --pred " + sim.string() + " --out " + out.string()) == 0);
  const nlohmann::json j = slurp_json(out);
  CHECK(j.at("mask").at("ap").get<double>() < 1.0);
  CHECK(j.at("boundary").at("ap").get<double>() <=
        j.at("mask").at("ap").get<double>() + 1e-12);
}

TEST_CASE("sensitivity: severity 0 curves are flat at 1; reruns are byte-identical") {
  TempDir dir;
  const fs::path out = dir.path / "curves.csv";
  REQUIRE(run_cli("sensitivity --severities 0 --count 10 --frame 128 --seed 3 --out " +
                  out.string()) == 0);
  std::istringstream in(slurp(out));
  std::string line;
  std::getline(in, line);
  CHECK(line == "error_kind,measure,axis,x_value,mean,std,n");
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    // mean column is the 5th field.
    std::istringstream ls(line);
    std::string field;
    for (int f = 0; f < 5; ++f) std::getline(ls, field, ',');
    CHECK(std::stod(field) == 1.0);
  }
  CHECK(rows >= 2);

  const fs::path out2 = dir.path / "curves2.csv";
  REQUIRE(run_cli("sensitivity --severities 0,2,5 --error object_localization --count 8 "
                  "--frame 128 --seed 3 --out " +
                  out2.string()) == 0);
  const fs::path out3 = dir.path / "curves3.csv";
  REQUIRE(run_cli("sensitivity --severities 0,2,5 --error object_localization --count 8 "
                  "--frame 128 --seed 3 --out " +
                  out3.string()) == 0);
  CHECK(slurp(out2) == slurp(out3));
}
