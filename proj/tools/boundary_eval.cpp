// Batch CLI for the boundary-aware segmentation metrics library.
//
// Subcommands: measure, eval-ap, eval-pq, simulate, sensitivity. All outputs
// are deterministic given inputs and --seed, and files are written atomically
// (write to a temp file, then rename).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "beval/detection_eval.hpp"
#include "beval/error_sim.hpp"
#include "beval/measures.hpp"
#include "beval/panoptic_eval.hpp"
#include "beval/parallel.hpp"
#include "beval/sensitivity.hpp"
#include "beval/shapes.hpp"

namespace {

constexpr const char* kToolVersion = "0.1.0";
constexpr double kCityscapesRatio = 0.005;

void write_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

void emit(const std::optional<std::string>& out_path, const std::string& content) {
  if (out_path) {
    write_atomic(*out_path, content);
  } else {
    std::cout << content;
  }
}

beval::BinaryMask load_single_mask(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  nlohmann::json j;
  in >> j;
  const auto& size = j.at("size");
  const int h = size.at(0).get<int>();
  const int w = size.at(1).get<int>();
  if (j.contains("counts")) {
    beval::RleMask rle{h, w, j.at("counts").get<std::vector<long long>>()};
    return beval::decode_rle(rle);
  }
  if (j.contains("polygon")) {
    const std::vector<double> flat = j.at("polygon").get<std::vector<double>>();
    if (flat.size() < 6 || flat.size() % 2 != 0)
      throw beval::MalformedEncodingError(path + ": polygon needs an even list of >= 6 values");
    beval::Polygon poly;
    for (std::size_t i = 0; i < flat.size(); i += 2) poly.vertices.push_back({flat[i], flat[i + 1]});
    return beval::rasterize_polygon(poly, h, w);
  }
  throw beval::MalformedEncodingError(path + ": mask record needs \"counts\" or \"polygon\"");
}

nlohmann::json provenance(const nlohmann::json& config) {
  return nlohmann::json{{"tool", "boundary_eval"}, {"version", kToolVersion}, {"config", config}};
}

struct DilationRatioOption {
  double value = 0.02;

  void attach(CLI::App* cmd) {
    cmd->add_option_function<std::string>(
        "--dilation-ratio",
        [this](const std::string& s) {
          if (s == "cityscapes") {
            value = kCityscapesRatio;
          } else {
            value = std::stod(s);
          }
          if (value <= 0.0) throw CLI::ValidationError("--dilation-ratio must be > 0");
        },
        "d as a fraction of the image diagonal (default 0.02; preset name 'cityscapes' = 0.005)");
  }
};

std::vector<double> parse_csv_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

// ---------------------------------------------------------------------------

int run_measure(const std::string& gt_path, const std::string& pred_path,
                const DilationRatioOption& ratio, const std::optional<std::string>& out_path) {
  const beval::BinaryMask gt = load_single_mask(gt_path);
  const beval::BinaryMask pred = load_single_mask(pred_path);
  beval::MeasureConfig cfg;
  cfg.dilation_ratio = ratio.value;
  const beval::MeasureReport report = beval::measure_all(gt, pred, cfg);
  nlohmann::json j = report;
  j["provenance"] = provenance({{"gt", gt_path}, {"pred", pred_path},
                                {"dilation_ratio", ratio.value}});
  emit(out_path, j.dump(2) + "\n");
  return 0;
}

int run_eval_ap(const std::string& gt_path, const std::string& det_path,
                const std::string& measure, const DilationRatioOption& ratio, int threads,
                const std::optional<std::string>& out_path) {
  const beval::DetectionDataset gt = beval::load_detection_gt(gt_path);
  const std::vector<beval::DetectionResult> dets = beval::load_detections(det_path);

  nlohmann::json j;
  nlohmann::json d_per_image = nlohmann::json::array();
  for (const beval::ImageRecord& img : gt.images)
    d_per_image.push_back({{"image_id", img.id},
                           {"d", beval::pixel_distance(img.height, img.width, ratio.value)}});
  j["provenance"] = provenance({{"gt", gt_path}, {"pred", det_path}, {"measure", measure},
                                {"dilation_ratio", ratio.value}, {"d_per_image", d_per_image}});

  beval::ApConfig cfg;
  cfg.dilation_ratio = ratio.value;
  cfg.threads = threads;
  if (measure == "mask" || measure == "both") {
    cfg.iou_measure = beval::IouMeasure::Mask;
    j["mask"] = beval::evaluate_detections(gt, dets, cfg);
  }
  if (measure == "boundary" || measure == "both") {
    cfg.iou_measure = beval::IouMeasure::BoundaryCombined;
    j["boundary"] = beval::evaluate_detections(gt, dets, cfg);
  }
  emit(out_path, j.dump(2) + "\n");
  return 0;
}

int run_eval_pq(const std::string& gt_path, const std::string& pred_path,
                const std::string& measure, const DilationRatioOption& ratio, int threads,
                const std::optional<std::string>& out_path) {
  nlohmann::json j;
  j["provenance"] = provenance({{"gt", gt_path}, {"pred", pred_path}, {"measure", measure},
                                {"dilation_ratio", ratio.value}});
  beval::PqConfig cfg;
  cfg.dilation_ratio = ratio.value;
  cfg.threads = threads;
  if (measure == "mask" || measure == "both") {
    cfg.iou_measure = beval::IouMeasure::Mask;
    j["mask"] = beval::evaluate_panoptic_files(gt_path, pred_path, cfg);
  }
  if (measure == "boundary" || measure == "both") {
    cfg.iou_measure = beval::IouMeasure::BoundaryCombined;
    j["boundary"] = beval::evaluate_panoptic_files(gt_path, pred_path, cfg);
  }
  emit(out_path, j.dump(2) + "\n");
  return 0;
}

int run_simulate(const std::string& gt_path, const std::string& error_name, double severity,
                 std::uint64_t seed, int threads, const std::string& out_path) {
  const beval::ErrorKind kind = beval::parse_error_kind(error_name);
  const beval::DetectionDataset gt = beval::load_detection_gt(gt_path);

  std::unordered_map<int, const beval::ImageRecord*> image_by_id;
  for (const beval::ImageRecord& img : gt.images) image_by_id[img.id] = &img;

  std::vector<beval::DetectionResult> results(gt.annotations.size());
  beval::parallel_for(gt.annotations.size(), threads, [&](std::size_t i) {
    const beval::InstanceAnnotation& ann = gt.annotations[i];
    const auto* img = image_by_id.at(ann.image_id);
    beval::GtObject obj;
    obj.mask = ann.segmentation.decode(img->height, img->width);
    if (!ann.segmentation.polygons.empty()) obj.polygon = ann.segmentation.polygons.front();
    beval::RngStream rng(beval::derive_seed(seed, i));
    const beval::BinaryMask pred = beval::apply_error(obj, kind, severity, rng);
    beval::DetectionResult det;
    det.image_id = ann.image_id;
    det.category_id = ann.category_id;
    det.segmentation.rle = beval::encode_rle(pred);
    det.score = 1.0;
    results[i] = std::move(det);
  });

  write_atomic(out_path, beval::detections_to_json(results).dump(2) + "\n");
  return 0;
}

int run_sensitivity(const std::optional<std::string>& gt_path,
                    const std::vector<std::string>& error_names,
                    const std::vector<std::string>& measure_names, const std::string& axis,
                    const std::string& severities_csv, double fixed_severity,
                    const std::vector<long long>& bin_edges, const DilationRatioOption& ratio,
                    std::uint64_t seed, int threads, int synthetic_count, int frame_size,
                    const std::optional<std::string>& out_path) {
  std::vector<beval::GtObject> gts;
  if (gt_path) {
    const beval::DetectionDataset ds = beval::load_detection_gt(*gt_path);
    std::unordered_map<int, const beval::ImageRecord*> image_by_id;
    for (const beval::ImageRecord& img : ds.images) image_by_id[img.id] = &img;
    for (const beval::InstanceAnnotation& ann : ds.annotations) {
      const auto* img = image_by_id.at(ann.image_id);
      beval::GtObject obj;
      obj.mask = ann.segmentation.decode(img->height, img->width);
      if (!ann.segmentation.polygons.empty()) obj.polygon = ann.segmentation.polygons.front();
      gts.push_back(std::move(obj));
    }
  } else {
    gts = beval::default_synthetic_objects(frame_size, frame_size, synthetic_count, seed);
  }

  std::vector<beval::MeasureKind> measures;
  for (const std::string& name : measure_names) measures.push_back(beval::parse_measure_kind(name));
  const std::vector<double> severities = parse_csv_doubles(severities_csv);

  beval::AreaBinning binning;
  if (bin_edges.empty()) {
    binning = beval::AreaBinning::side16_increments(12);
  } else {
    binning.edges = bin_edges;
  }

  std::vector<beval::SensitivityCurve> curves;
  for (const std::string& error_name : error_names) {
    const beval::ErrorKind kind = beval::parse_error_kind(error_name);
    if (axis == "severity" || axis == "both") {
      auto swept = beval::run_severity_sweep(gts, kind, severities, measures, ratio.value,
                                             seed, threads);
      curves.insert(curves.end(), swept.begin(), swept.end());
    }
    if (axis == "size" || axis == "both") {
      auto swept = beval::run_size_sweep(gts, kind, fixed_severity, measures, binning,
                                         ratio.value, seed, threads);
      curves.insert(curves.end(), swept.begin(), swept.end());
    }
  }

  std::ostringstream csv;
  beval::emit_curves_csv(curves, csv);
  emit(out_path, csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary-aware segmentation quality evaluation"};
  app.require_subcommand(1);

  std::string gt_path, pred_path, out_path;
  std::string measure = "both";
  std::string error_name = "scale_dilation";
  std::string axis = "severity";
  std::string severities_csv = "0,1,2,3,5,8,13,21";
  std::vector<std::string> error_names = {"scale_dilation"};
  std::vector<std::string> measure_names = {"mask_iou", "boundary_iou"};
  std::vector<long long> bin_edges;
  double severity = 0.0;
  double fixed_severity = 5.0;
  std::uint64_t seed = 0;
  int threads = 1;
  int synthetic_count = 60;
  int frame_size = 320;
  DilationRatioOption ratio;

  auto* cmd_measure = app.add_subcommand("measure", "Pairwise measures for one GT/pred mask pair");
  cmd_measure->add_option("--gt", gt_path, "GT mask JSON file")->required();
  cmd_measure->add_option("--pred", pred_path, "Prediction mask JSON file")->required();
  cmd_measure->add_option("--out", out_path, "Output path (default: stdout)");
  ratio.attach(cmd_measure);

  auto* cmd_ap = app.add_subcommand("eval-ap", "COCO-protocol instance segmentation AP");
  cmd_ap->add_option("--gt", gt_path, "GT dataset JSON")->required();
  cmd_ap->add_option("--pred", pred_path, "Detections JSON")->required();
  cmd_ap->add_option("--out", out_path, "Output path (default: stdout)");
  cmd_ap->add_option("--measure", measure, "mask | boundary | both")
      ->check(CLI::IsMember({"mask", "boundary", "both"}));
  cmd_ap->add_option("--threads", threads, "Worker threads");
  ratio.attach(cmd_ap);

  auto* cmd_pq = app.add_subcommand("eval-pq", "Panoptic quality");
  cmd_pq->add_option("--gt", gt_path, "GT panoptic JSON")->required();
  cmd_pq->add_option("--pred", pred_path, "Prediction panoptic JSON")->required();
  cmd_pq->add_option("--out", out_path, "Output path (default: stdout)");
  cmd_pq->add_option("--measure", measure, "mask | boundary | both")
      ->check(CLI::IsMember({"mask", "boundary", "both"}));
  cmd_pq->add_option("--threads", threads, "Worker threads");
  ratio.attach(cmd_pq);

  auto* cmd_sim = app.add_subcommand("simulate", "Generate pseudo-predictions from GT");
  cmd_sim->add_option("--gt", gt_path, "GT dataset JSON")->required();
  cmd_sim->add_option("--error", error_name, "Error kind")->required();
  cmd_sim->add_option("--severity", severity, "Error severity")->required();
  cmd_sim->add_option("--seed", seed, "Random seed");
  cmd_sim->add_option("--threads", threads, "Worker threads");
  cmd_sim->add_option("--out", out_path, "Output detections JSON")->required();

  auto* cmd_sens = app.add_subcommand("sensitivity", "Severity/size sweeps as CSV curves");
  cmd_sens->add_option("--gt", gt_path, "GT dataset JSON (default: built-in synthetic shapes)");
  cmd_sens->add_option("--error", error_names, "Error kinds");
  cmd_sens->add_option("--measures", measure_names, "Measures to evaluate");
  cmd_sens->add_option("--axis", axis, "severity | size | both")
      ->check(CLI::IsMember({"severity", "size", "both"}));
  cmd_sens->add_option("--severities", severities_csv, "Comma-separated severity list");
  cmd_sens->add_option("--severity", fixed_severity, "Fixed severity for the size sweep");
  cmd_sens->add_option("--bins", bin_edges, "Pixel-area bin edges");
  cmd_sens->add_option("--seed", seed, "Random seed");
  cmd_sens->add_option("--threads", threads, "Worker threads");
  cmd_sens->add_option("--count", synthetic_count, "Synthetic object count");
  cmd_sens->add_option("--frame", frame_size, "Synthetic frame size");
  cmd_sens->add_option("--out", out_path, "Output CSV path (default: stdout)");
  ratio.attach(cmd_sens);

  CLI11_PARSE(app, argc, argv);

  auto opt_out = [&]() -> std::optional<std::string> {
    return out_path.empty() ? std::nullopt : std::optional<std::string>(out_path);
  };

  try {
    if (cmd_measure->parsed()) return run_measure(gt_path, pred_path, ratio, opt_out());
    if (cmd_ap->parsed()) return run_eval_ap(gt_path, pred_path, measure, ratio, threads, opt_out());
    if (cmd_pq->parsed()) return run_eval_pq(gt_path, pred_path, measure, ratio, threads, opt_out());
    if (cmd_sim->parsed()) return run_simulate(gt_path, error_name, severity, seed, threads, out_path);
    if (cmd_sens->parsed()) {
      const auto gt_opt =
          gt_path.empty() ? std::nullopt : std::optional<std::string>(gt_path);
      return run_sensitivity(gt_opt, error_names, measure_names, axis, severities_csv,
                             fixed_severity, bin_edges, ratio, seed, threads, synthetic_count,
                             frame_size, opt_out());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
