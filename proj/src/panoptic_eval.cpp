#include "beval/panoptic_eval.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>
#include <opencv2/imgcodecs.hpp>

#include "beval/measures.hpp"
#include "beval/parallel.hpp"

namespace beval {

void PanopticLabelMap::validate() const {
  if (height <= 0 || width <= 0 || ids.size() != static_cast<std::size_t>(height) * width)
    throw MalformedMapError("panoptic map: inconsistent dimensions");
  std::set<int> listed;
  for (const SegmentInfo& seg : segments) {
    if (seg.id <= 0) throw MalformedMapError("panoptic map: segment id must be > 0");
    if (!listed.insert(seg.id).second)
      throw MalformedMapError("panoptic map: duplicate segment id " + std::to_string(seg.id));
  }
  std::unordered_map<int, long long> pixel_count;
  for (int id : ids) {
    if (id < 0) throw MalformedMapError("panoptic map: negative pixel id");
    if (id > 0) {
      if (!listed.count(id))
        throw MalformedMapError("panoptic map: orphan pixel id " + std::to_string(id));
      ++pixel_count[id];
    }
  }
  for (const SegmentInfo& seg : segments)
    if (pixel_count[seg.id] == 0)
      throw MalformedMapError("panoptic map: segment " + std::to_string(seg.id) +
                              " has no pixels");
}

namespace {

BinaryMask segment_mask(const PanopticLabelMap& map, int id) {
  BinaryMask m(map.height, map.width);
  for (std::size_t i = 0; i < map.ids.size(); ++i)
    if (map.ids[i] == id) m.pixels[i] = 1;
  return m;
}

// Boundary IoU with GT-void pixels removed from both boundary-region sets.
double boundary_iou_excluding_void(const BinaryMask& gt_seg, const BinaryMask& pred_seg,
                                   const BinaryMask& valid, int d) {
  const BinaryMask bg = mask_and(boundary_region(gt_seg, d), valid);
  const BinaryMask bp = mask_and(boundary_region(pred_seg, d), valid);
  const long long uni = count_or(bg, bp);
  if (uni == 0) return 0.0;
  return static_cast<double>(count_and(bg, bp)) / static_cast<double>(uni);
}

}  // namespace

PanopticMatchResult match_segments(const PanopticLabelMap& gt, const PanopticLabelMap& pred,
                                   IouMeasure measure, int d) {
  if (gt.height != pred.height || gt.width != pred.width)
    throw FrameMismatchError("panoptic maps have different frames");

  std::unordered_map<int, const SegmentInfo*> gt_info, pred_info;
  for (const SegmentInfo& seg : gt.segments) gt_info[seg.id] = &seg;
  for (const SegmentInfo& seg : pred.segments) pred_info[seg.id] = &seg;

  // Joint histogram over (gt id, pred id); gt id 0 is void.
  std::map<std::pair<int, int>, long long> inter;
  std::unordered_map<int, long long> gt_area, pred_area;
  for (std::size_t i = 0; i < gt.ids.size(); ++i) {
    const int g = gt.ids[i];
    const int p = pred.ids[i];
    ++inter[{g, p}];
    if (g > 0) ++gt_area[g];
    if (p > 0) ++pred_area[p];
  }

  BinaryMask valid(gt.height, gt.width);
  for (std::size_t i = 0; i < gt.ids.size(); ++i) valid.pixels[i] = gt.ids[i] != 0 ? 1 : 0;

  PanopticMatchResult res;
  std::set<int> matched_gt, matched_pred;
  for (const auto& [key, intersection] : inter) {
    const auto [g, p] = key;
    if (g == 0 || p == 0) continue;
    const SegmentInfo* gi = gt_info.count(g) ? gt_info.at(g) : nullptr;
    const SegmentInfo* pi = pred_info.count(p) ? pred_info.at(p) : nullptr;
    if (gi == nullptr || pi == nullptr || gi->category_id != pi->category_id) continue;

    long long void_in_pred = 0;
    if (auto it = inter.find({0, p}); it != inter.end()) void_in_pred = it->second;
    const long long uni = gt_area[g] + pred_area[p] - intersection - void_in_pred;
    const double miou = uni > 0 ? static_cast<double>(intersection) / static_cast<double>(uni) : 0.0;
    double value = miou;
    if (measure == IouMeasure::BoundaryCombined && miou > 0.5) {
      // min(a, b) <= a, so the mask-IoU gate alone cannot admit extra matches.
      const BinaryMask gm = segment_mask(gt, g);
      const BinaryMask pm = segment_mask(pred, p);
      value = std::min(miou, boundary_iou_excluding_void(gm, pm, valid, d));
    }
    if (value > 0.5) {
      res.matches.push_back({g, p, gi->category_id, value});
      matched_gt.insert(g);
      matched_pred.insert(p);
    }
  }

  for (const SegmentInfo& seg : gt.segments)
    if (!matched_gt.count(seg.id)) res.unmatched_gt.push_back(seg);
  for (const SegmentInfo& seg : pred.segments) {
    if (matched_pred.count(seg.id)) continue;
    long long void_overlap = 0;
    if (auto it = inter.find({0, seg.id}); it != inter.end()) void_overlap = it->second;
    // Predictions dominated by void are exempt from FP counting.
    if (pred_area.count(seg.id) &&
        static_cast<double>(void_overlap) > 0.5 * static_cast<double>(pred_area[seg.id]))
      continue;
    res.unmatched_pred.push_back(seg);
  }
  return res;
}

PqReport compute_pq(const std::vector<PanopticMatchResult>& per_image,
                    const std::vector<const PanopticLabelMap*>& gts,
                    const std::vector<const PanopticLabelMap*>& preds) {
  PqReport report;
  auto category_flag = [&](int category_id, bool isthing) {
    auto& stats = report.per_category[category_id];
    stats.isthing = isthing;
    return &stats;
  };
  (void)gts;
  (void)preds;

  for (const PanopticMatchResult& img : per_image) {
    for (const SegmentMatch& m : img.matches) {
      PqCategoryStats* stats = &report.per_category[m.category_id];
      stats->iou_sum += m.iou;
      stats->tp += 1;
    }
    for (const SegmentInfo& seg : img.unmatched_gt)
      category_flag(seg.category_id, seg.isthing)->fn += 1;
    for (const SegmentInfo& seg : img.unmatched_pred)
      category_flag(seg.category_id, seg.isthing)->fp += 1;
  }
  // isthing flags for TP-only categories come from the GT metadata.
  for (const PanopticLabelMap* gt : gts)
    for (const SegmentInfo& seg : gt->segments)
      if (report.per_category.count(seg.category_id))
        report.per_category[seg.category_id].isthing = seg.isthing;

  auto summarize = [&](auto include) {
    PqSummary s;
    for (const auto& [cat, stats] : report.per_category) {
      if (!stats.present() || !include(stats)) continue;
      s.pq += stats.pq();
      s.sq += stats.sq();
      s.rq += stats.rq();
      ++s.categories;
    }
    if (s.categories > 0) {
      s.pq /= static_cast<double>(s.categories);
      s.sq /= static_cast<double>(s.categories);
      s.rq /= static_cast<double>(s.categories);
    }
    return s;
  };
  report.overall = summarize([](const PqCategoryStats&) { return true; });
  report.things = summarize([](const PqCategoryStats& c) { return c.isthing; });
  report.stuff = summarize([](const PqCategoryStats& c) { return !c.isthing; });
  return report;
}

PqReport evaluate_panoptic(const std::vector<PanopticLabelMap>& gts,
                           const std::vector<PanopticLabelMap>& preds, const PqConfig& cfg) {
  if (gts.size() != preds.size())
    throw std::invalid_argument("panoptic eval: gt/pred image counts differ");
  for (const PanopticLabelMap& m : gts) m.validate();
  for (const PanopticLabelMap& m : preds) m.validate();

  std::vector<PanopticMatchResult> per_image(gts.size());
  parallel_for(gts.size(), cfg.threads, [&](std::size_t i) {
    const int d = pixel_distance(gts[i].height, gts[i].width, cfg.dilation_ratio);
    per_image[i] = match_segments(gts[i], preds[i], cfg.iou_measure, d);
  });

  std::vector<const PanopticLabelMap*> gt_ptrs, pred_ptrs;
  for (const auto& m : gts) gt_ptrs.push_back(&m);
  for (const auto& m : preds) pred_ptrs.push_back(&m);
  return compute_pq(per_image, gt_ptrs, pred_ptrs);
}

void to_json(nlohmann::json& j, const PqReport& r) {
  auto summary = [](const PqSummary& s) {
    return nlohmann::json{
        {"pq", s.pq}, {"sq", s.sq}, {"rq", s.rq}, {"categories", s.categories}};
  };
  j = nlohmann::json{{"overall", summary(r.overall)},
                     {"things", summary(r.things)},
                     {"stuff", summary(r.stuff)}};
  nlohmann::json per_cat = nlohmann::json::object();
  for (const auto& [cat, stats] : r.per_category) {
    per_cat[std::to_string(cat)] = {{"pq", stats.pq()}, {"sq", stats.sq()},
                                    {"rq", stats.rq()}, {"tp", stats.tp},
                                    {"fp", stats.fp},   {"fn", stats.fn},
                                    {"isthing", stats.isthing}};
  }
  j["per_category"] = per_cat;
}

namespace {

PanopticLabelMap decode_png_map(const std::string& png_path, int height, int width) {
  const cv::Mat img = cv::imread(png_path, cv::IMREAD_COLOR);
  if (img.empty()) throw MalformedMapError("cannot read panoptic png: " + png_path);
  if (img.rows != height || img.cols != width)
    throw MalformedMapError("panoptic png frame mismatch: " + png_path);
  PanopticLabelMap map(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const cv::Vec3b bgr = img.at<cv::Vec3b>(r, c);
      // COCO panoptic encoding: id = R + 256*G + 65536*B.
      map.set_id(r, c, bgr[2] + 256 * bgr[1] + 65536 * bgr[0]);
    }
  }
  return map;
}

}  // namespace

std::map<int, PanopticLabelMap> load_panoptic_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  nlohmann::json j;
  in >> j;

  std::map<int, std::pair<int, int>> frames;
  for (const auto& img : j.at("images"))
    frames[img.at("id").get<int>()] = {img.at("height").get<int>(), img.at("width").get<int>()};

  const std::filesystem::path base_dir = std::filesystem::path(path).parent_path();
  std::map<int, PanopticLabelMap> maps;
  for (const auto& ann : j.at("annotations")) {
    const int image_id = ann.at("image_id").get<int>();
    if (!frames.count(image_id))
      throw MalformedMapError("panoptic annotation references unknown image " +
                              std::to_string(image_id));
    const auto [h, w] = frames.at(image_id);
    PanopticLabelMap map;
    if (ann.contains("ids")) {
      map = PanopticLabelMap(h, w);
      const auto& rows = ann.at("ids");
      if (static_cast<int>(rows.size()) != h)
        throw MalformedMapError("panoptic id grid has wrong row count");
      for (int r = 0; r < h; ++r) {
        const auto& row = rows.at(static_cast<std::size_t>(r));
        if (static_cast<int>(row.size()) != w)
          throw MalformedMapError("panoptic id grid has wrong column count");
        for (int c = 0; c < w; ++c) map.set_id(r, c, row.at(static_cast<std::size_t>(c)).get<int>());
      }
    } else if (ann.contains("png")) {
      map = decode_png_map((base_dir / ann.at("png").get<std::string>()).string(), h, w);
    } else {
      throw MalformedMapError("panoptic annotation needs either \"ids\" or \"png\"");
    }
    for (const auto& seg : ann.at("segments_info"))
      map.segments.push_back({seg.at("id").get<int>(), seg.at("category_id").get<int>(),
                              seg.value("isthing", false)});
    map.validate();
    maps.emplace(image_id, std::move(map));
  }
  return maps;
}

nlohmann::json panoptic_to_json(const std::map<int, PanopticLabelMap>& maps) {
  nlohmann::json j;
  j["images"] = nlohmann::json::array();
  j["annotations"] = nlohmann::json::array();
  for (const auto& [image_id, map] : maps) {
    j["images"].push_back({{"id", image_id}, {"height", map.height}, {"width", map.width}});
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < map.height; ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < map.width; ++c) row.push_back(map.id_at(r, c));
      rows.push_back(std::move(row));
    }
    nlohmann::json segs = nlohmann::json::array();
    for (const SegmentInfo& seg : map.segments)
      segs.push_back({{"id", seg.id}, {"category_id", seg.category_id},
                      {"isthing", seg.isthing}});
    j["annotations"].push_back(
        {{"image_id", image_id}, {"ids", std::move(rows)}, {"segments_info", std::move(segs)}});
  }
  return j;
}

PqReport evaluate_panoptic_files(const std::string& gt_path, const std::string& pred_path,
                                 const PqConfig& cfg) {
  const std::map<int, PanopticLabelMap> gt_maps = load_panoptic_file(gt_path);
  const std::map<int, PanopticLabelMap> pred_maps = load_panoptic_file(pred_path);
  std::vector<PanopticLabelMap> gts, preds;
  for (const auto& [image_id, gt_map] : gt_maps) {
    const auto it = pred_maps.find(image_id);
    if (it == pred_maps.end())
      throw MalformedMapError("prediction file is missing image " + std::to_string(image_id));
    gts.push_back(gt_map);
    preds.push_back(it->second);
  }
  return evaluate_panoptic(gts, preds, cfg);
}

}  // namespace beval
