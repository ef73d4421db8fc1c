#include "beval/detection_eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "beval/measures.hpp"
#include "beval/parallel.hpp"

namespace beval {

namespace {

constexpr double kAreaSmallMax = 32.0 * 32.0;
constexpr double kAreaMediumMax = 96.0 * 96.0;
constexpr double kAreaInf = 1e18;

struct AreaRange {
  std::string name;
  double lo;
  double hi;
};

const std::vector<AreaRange>& area_ranges() {
  static const std::vector<AreaRange> ranges = {
      {"all", 0.0, kAreaInf},
      {"small", 0.0, kAreaSmallMax},
      {"medium", kAreaSmallMax, kAreaMediumMax},
      {"large", kAreaMediumMax, kAreaInf},
  };
  return ranges;
}

}  // namespace

BinaryMask SegmentationSpec::decode(int height, int width) const {
  if (rle) {
    if (rle->height != height || rle->width != width)
      throw MalformedEncodingError("rle frame does not match image frame");
    return decode_rle(*rle);
  }
  BinaryMask mask(height, width);
  for (const Polygon& poly : polygons) mask = mask_or(mask, rasterize_polygon(poly, height, width));
  return mask;
}

std::vector<std::vector<double>> pairwise_iou_matrix(
    const std::vector<const InstanceAnnotation*>& gts,
    const std::vector<BinaryMask>& det_masks, const ApConfig& cfg, int frame_h, int frame_w) {
  const int d = pixel_distance(frame_h, frame_w, cfg.dilation_ratio);
  std::vector<BinaryMask> gt_masks;
  gt_masks.reserve(gts.size());
  for (const InstanceAnnotation* gt : gts) gt_masks.push_back(gt->segmentation.decode(frame_h, frame_w));

  std::vector<std::vector<double>> iou(det_masks.size(), std::vector<double>(gts.size(), 0.0));
  for (std::size_t i = 0; i < det_masks.size(); ++i) {
    for (std::size_t j = 0; j < gts.size(); ++j) {
      if (gts[j]->iscrowd) {
        // Crowd regions: intersection over detection area, both measure modes.
        const long long det_area = det_masks[i].area();
        iou[i][j] = det_area == 0 ? 0.0
                                  : static_cast<double>(count_and(det_masks[i], gt_masks[j])) /
                                        static_cast<double>(det_area);
      } else if (cfg.iou_measure == IouMeasure::Mask) {
        iou[i][j] = mask_iou(gt_masks[j], det_masks[i]);
      } else {
        iou[i][j] = combined_iou(gt_masks[j], det_masks[i], d);
      }
    }
  }
  return iou;
}

MatchResult match_image_category(const std::vector<const InstanceAnnotation*>& gts,
                                 const std::vector<double>& det_scores,
                                 const std::vector<double>& det_areas,
                                 const std::vector<std::vector<double>>& iou,
                                 double threshold, double area_lo, double area_hi,
                                 const ApConfig& cfg) {
  (void)det_scores;  // detections must already be in descending-score order
  const std::size_t n_gt = gts.size();
  const std::size_t n_det = std::min(det_areas.size(),
                                     static_cast<std::size_t>(cfg.max_detections_per_image));

  MatchResult res;
  res.gt_ignore.resize(n_gt);
  for (std::size_t j = 0; j < n_gt; ++j)
    res.gt_ignore[j] =
        gts[j]->iscrowd || gts[j]->area < area_lo || gts[j]->area > area_hi;

  // Evaluate non-ignored ground truth first (stable order).
  std::vector<std::size_t> gt_order(n_gt);
  std::iota(gt_order.begin(), gt_order.end(), 0);
  std::stable_sort(gt_order.begin(), gt_order.end(), [&](std::size_t a, std::size_t b) {
    return res.gt_ignore[a] < res.gt_ignore[b];
  });

  res.det_match.assign(n_det, -1);
  res.det_ignore.assign(n_det, false);
  std::vector<int> gt_match(n_gt, -1);

  for (std::size_t i = 0; i < n_det; ++i) {
    double best = std::min(threshold, 1.0 - 1e-10);
    int m = -1;
    for (std::size_t oj = 0; oj < n_gt; ++oj) {
      const std::size_t j = gt_order[oj];
      if (gt_match[j] >= 0 && !gts[j]->iscrowd) continue;
      // Once a real match exists, stop before falling back onto ignored GT.
      if (m >= 0 && !res.gt_ignore[static_cast<std::size_t>(m)] && res.gt_ignore[j]) break;
      if (iou[i][j] < best) continue;
      best = iou[i][j];
      m = static_cast<int>(j);
    }
    if (m < 0) continue;
    res.det_match[i] = m;
    res.det_ignore[i] = res.gt_ignore[static_cast<std::size_t>(m)];
    gt_match[static_cast<std::size_t>(m)] = static_cast<int>(i);
  }
  // Unmatched detections outside the area range do not count as FP.
  for (std::size_t i = 0; i < n_det; ++i)
    if (res.det_match[i] < 0 && (det_areas[i] < area_lo || det_areas[i] > area_hi))
      res.det_ignore[i] = true;
  return res;
}

namespace {

// All precomputed state for one (image, category) cell.
struct EvalUnit {
  int category_id = 0;
  std::vector<const InstanceAnnotation*> gts;
  std::vector<double> det_scores;  // descending
  std::vector<double> det_areas;
  std::vector<std::size_t> det_input_rank;  // global tie-break order
  std::vector<std::vector<double>> iou;
};

struct PooledDet {
  double score;
  std::size_t input_rank;
  bool matched;
  bool ignored;
};

double ap_from_pool(std::vector<PooledDet>& pool, long long npig, int recall_points) {
  if (npig == 0) return -1.0;
  std::stable_sort(pool.begin(), pool.end(), [](const PooledDet& a, const PooledDet& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.input_rank < b.input_rank;
  });
  std::vector<double> recall, precision;
  long long tp = 0, fp = 0;
  for (const PooledDet& det : pool) {
    if (det.ignored) continue;
    if (det.matched) ++tp; else ++fp;
    recall.push_back(static_cast<double>(tp) / static_cast<double>(npig));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
  }
  // Monotone envelope from the right, then sample at evenly spaced recall points.
  for (std::size_t i = precision.size(); i-- > 1;)
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double sum = 0.0;
  for (int k = 0; k < recall_points; ++k) {
    const double want = static_cast<double>(k) / (recall_points - 1);
    const auto it = std::lower_bound(recall.begin(), recall.end(), want);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / recall_points;
}

}  // namespace

ApReport evaluate_detections(const DetectionDataset& gt,
                             const std::vector<DetectionResult>& detections,
                             const ApConfig& cfg) {
  std::unordered_map<int, const ImageRecord*> image_by_id;
  for (const ImageRecord& img : gt.images) image_by_id[img.id] = &img;
  std::set<int> category_ids;
  for (const CategoryRecord& cat : gt.categories) category_ids.insert(cat.id);

  for (const InstanceAnnotation& ann : gt.annotations) {
    if (!image_by_id.count(ann.image_id))
      throw ReferentialIntegrityError("annotation " + std::to_string(ann.id) +
                                      " references unknown image " + std::to_string(ann.image_id));
    if (!category_ids.count(ann.category_id))
      throw ReferentialIntegrityError("annotation " + std::to_string(ann.id) +
                                      " references unknown category " +
                                      std::to_string(ann.category_id));
  }
  for (std::size_t i = 0; i < detections.size(); ++i) {
    if (!image_by_id.count(detections[i].image_id))
      throw ReferentialIntegrityError("detection " + std::to_string(i) +
                                      " references unknown image " +
                                      std::to_string(detections[i].image_id));
    if (!category_ids.count(detections[i].category_id))
      throw ReferentialIntegrityError("detection " + std::to_string(i) +
                                      " references unknown category " +
                                      std::to_string(detections[i].category_id));
  }

  // Group by (image, category).
  std::map<std::pair<int, int>, EvalUnit> units;
  for (const InstanceAnnotation& ann : gt.annotations)
    units[{ann.image_id, ann.category_id}].gts.push_back(&ann);
  std::map<std::pair<int, int>, std::vector<std::size_t>> det_groups;
  for (std::size_t i = 0; i < detections.size(); ++i)
    det_groups[{detections[i].image_id, detections[i].category_id}].push_back(i);
  for (auto& [key, idxs] : det_groups) units[key];  // ensure unit exists

  std::vector<std::pair<const std::pair<int, int>, EvalUnit>*> unit_ptrs;
  for (auto& kv : units) unit_ptrs.push_back(&kv);

  parallel_for(unit_ptrs.size(), cfg.threads, [&](std::size_t u) {
    auto& [key, unit] = *unit_ptrs[u];
    unit.category_id = key.second;
    const ImageRecord& img = *image_by_id.at(key.first);

    std::vector<std::size_t> det_idx;
    if (auto it = det_groups.find(key); it != det_groups.end()) det_idx = it->second;
    // Descending score, stable on input order.
    std::stable_sort(det_idx.begin(), det_idx.end(), [&](std::size_t a, std::size_t b) {
      return detections[a].score > detections[b].score;
    });
    if (det_idx.size() > static_cast<std::size_t>(cfg.max_detections_per_image))
      det_idx.resize(static_cast<std::size_t>(cfg.max_detections_per_image));

    std::vector<BinaryMask> det_masks;
    det_masks.reserve(det_idx.size());
    for (std::size_t i : det_idx) {
      det_masks.push_back(detections[i].segmentation.decode(img.height, img.width));
      unit.det_scores.push_back(detections[i].score);
      unit.det_areas.push_back(static_cast<double>(det_masks.back().area()));
      unit.det_input_rank.push_back(i);
    }
    unit.iou = pairwise_iou_matrix(unit.gts, det_masks, cfg, img.height, img.width);
  });

  // Substitute decoded area when the record did not carry one.
  std::unordered_map<const InstanceAnnotation*, double> gt_area;
  for (auto* kv : unit_ptrs) {
    const ImageRecord& img = *image_by_id.at(kv->first.first);
    for (const InstanceAnnotation* ann : kv->second.gts)
      gt_area[ann] = ann->area > 0.0
                         ? ann->area
                         : static_cast<double>(ann->segmentation.decode(img.height, img.width).area());
  }

  ApReport report;
  const std::size_t n_thr = cfg.iou_thresholds.size();
  // ap_sum[range][threshold]: accumulated per-category AP and category counts.
  std::vector<std::vector<double>> ap_sum(area_ranges().size(), std::vector<double>(n_thr, 0.0));
  std::vector<std::vector<long long>> ap_cnt(area_ranges().size(),
                                             std::vector<long long>(n_thr, 0));

  for (int cat : category_ids) {
    std::vector<EvalUnit*> cat_units;
    for (auto* kv : unit_ptrs)
      if (kv->first.second == cat) cat_units.push_back(&kv->second);

    double cat_ap_sum = 0.0;
    long long cat_ap_cnt = 0;
    for (std::size_t ri = 0; ri < area_ranges().size(); ++ri) {
      const AreaRange& range = area_ranges()[ri];
      for (std::size_t ti = 0; ti < n_thr; ++ti) {
        long long npig = 0;
        std::vector<PooledDet> pool;
        for (EvalUnit* unit : cat_units) {
          // Area-range ignores use the stored (or decoded) GT area.
          std::vector<const InstanceAnnotation*> gts = unit->gts;
          std::vector<InstanceAnnotation> patched;  // stable storage for area overrides
          patched.reserve(gts.size());
          for (auto*& g : gts) {
            patched.push_back(*g);
            patched.back().area = gt_area.at(g);
            g = &patched.back();
          }
          const MatchResult match =
              match_image_category(gts, unit->det_scores, unit->det_areas, unit->iou,
                                   cfg.iou_thresholds[ti], range.lo, range.hi, cfg);
          for (std::size_t j = 0; j < gts.size(); ++j)
            if (!match.gt_ignore[j]) ++npig;
          for (std::size_t i = 0; i < match.det_match.size(); ++i)
            pool.push_back({unit->det_scores[i], unit->det_input_rank[i],
                            match.det_match[i] >= 0 && !match.det_ignore[i],
                            match.det_ignore[i]});
        }
        const double ap = ap_from_pool(pool, npig, cfg.recall_points);
        if (ap >= 0.0) {
          ap_sum[ri][ti] += ap;
          ap_cnt[ri][ti] += 1;
          if (ri == 0) {
            cat_ap_sum += ap;
            ++cat_ap_cnt;
          }
        }
      }
    }
    report.per_category[cat] =
        cat_ap_cnt > 0 ? std::optional<double>(cat_ap_sum / cat_ap_cnt) : std::nullopt;
  }

  auto mean_over = [&](std::size_t ri, std::optional<std::size_t> only_thr) -> std::optional<double> {
    double sum = 0.0;
    long long cnt = 0;
    for (std::size_t ti = 0; ti < n_thr; ++ti) {
      if (only_thr && ti != *only_thr) continue;
      sum += ap_sum[ri][ti];
      cnt += ap_cnt[ri][ti];
    }
    if (cnt == 0) return std::nullopt;
    return sum / cnt;
  };

  auto thr_index = [&](double t) -> std::optional<std::size_t> {
    for (std::size_t ti = 0; ti < n_thr; ++ti)
      if (std::abs(cfg.iou_thresholds[ti] - t) < 1e-9) return ti;
    return std::nullopt;
  };

  report.ap = mean_over(0, std::nullopt);
  if (auto t50 = thr_index(0.50)) report.ap50 = mean_over(0, t50);
  if (auto t75 = thr_index(0.75)) report.ap75 = mean_over(0, t75);
  report.ap_s = mean_over(1, std::nullopt);
  report.ap_m = mean_over(2, std::nullopt);
  report.ap_l = mean_over(3, std::nullopt);
  return report;
}

void to_json(nlohmann::json& j, const ApReport& r) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  j = nlohmann::json{{"ap", opt(r.ap)},     {"ap50", opt(r.ap50)}, {"ap75", opt(r.ap75)},
                     {"ap_s", opt(r.ap_s)}, {"ap_m", opt(r.ap_m)}, {"ap_l", opt(r.ap_l)}};
  nlohmann::json per_cat = nlohmann::json::object();
  for (const auto& [cat, ap] : r.per_category) per_cat[std::to_string(cat)] = opt(ap);
  j["per_category"] = per_cat;
}

namespace {

SegmentationSpec parse_segmentation(const nlohmann::json& j) {
  SegmentationSpec seg;
  if (j.is_object()) {
    RleMask rle;
    const auto& size = j.at("size");
    rle.height = size.at(0).get<int>();
    rle.width = size.at(1).get<int>();
    rle.counts = j.at("counts").get<std::vector<long long>>();
    seg.rle = rle;
  } else if (j.is_array()) {
    for (const auto& flat : j) {
      const std::vector<double> coords = flat.get<std::vector<double>>();
      if (coords.size() < 6 || coords.size() % 2 != 0)
        throw MalformedEncodingError("polygon needs an even list of >= 6 coordinates");
      Polygon poly;
      for (std::size_t i = 0; i < coords.size(); i += 2)
        poly.vertices.push_back({coords[i], coords[i + 1]});
      seg.polygons.push_back(std::move(poly));
    }
  } else {
    throw MalformedEncodingError("segmentation must be an RLE object or polygon list");
  }
  return seg;
}

nlohmann::json segmentation_to_json(const SegmentationSpec& seg) {
  if (seg.rle) {
    return nlohmann::json{{"size", {seg.rle->height, seg.rle->width}},
                          {"counts", seg.rle->counts}};
  }
  nlohmann::json arr = nlohmann::json::array();
  for (const Polygon& poly : seg.polygons) {
    nlohmann::json flat = nlohmann::json::array();
    for (const Point& v : poly.vertices) {
      flat.push_back(v.x);
      flat.push_back(v.y);
    }
    arr.push_back(flat);
  }
  return arr;
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

}  // namespace

DetectionDataset parse_detection_gt(const nlohmann::json& j) {
  DetectionDataset ds;
  for (const auto& img : j.at("images"))
    ds.images.push_back({img.at("id").get<int>(), img.at("height").get<int>(),
                         img.at("width").get<int>()});
  for (const auto& ann : j.at("annotations")) {
    InstanceAnnotation a;
    a.id = ann.at("id").get<long long>();
    a.image_id = ann.at("image_id").get<int>();
    a.category_id = ann.at("category_id").get<int>();
    a.segmentation = parse_segmentation(ann.at("segmentation"));
    a.area = ann.value("area", 0.0);
    a.iscrowd = ann.value("iscrowd", 0) != 0;
    ds.annotations.push_back(std::move(a));
  }
  for (const auto& cat : j.at("categories"))
    ds.categories.push_back({cat.at("id").get<int>(), cat.value("name", std::string())});
  return ds;
}

std::vector<DetectionResult> parse_detections(const nlohmann::json& j) {
  std::vector<DetectionResult> dets;
  for (const auto& det : j) {
    DetectionResult d;
    d.image_id = det.at("image_id").get<int>();
    d.category_id = det.at("category_id").get<int>();
    d.segmentation = parse_segmentation(det.at("segmentation"));
    d.score = det.at("score").get<double>();
    if (!std::isfinite(d.score)) throw MalformedEncodingError("detection score must be finite");
    dets.push_back(std::move(d));
  }
  return dets;
}

nlohmann::json detection_gt_to_json(const DetectionDataset& ds) {
  nlohmann::json j;
  j["images"] = nlohmann::json::array();
  for (const ImageRecord& img : ds.images)
    j["images"].push_back({{"id", img.id}, {"height", img.height}, {"width", img.width}});
  j["annotations"] = nlohmann::json::array();
  for (const InstanceAnnotation& ann : ds.annotations)
    j["annotations"].push_back({{"id", ann.id},
                                {"image_id", ann.image_id},
                                {"category_id", ann.category_id},
                                {"segmentation", segmentation_to_json(ann.segmentation)},
                                {"area", ann.area},
                                {"iscrowd", ann.iscrowd ? 1 : 0}});
  j["categories"] = nlohmann::json::array();
  for (const CategoryRecord& cat : ds.categories)
    j["categories"].push_back({{"id", cat.id}, {"name", cat.name}});
  return j;
}

nlohmann::json detections_to_json(const std::vector<DetectionResult>& dets) {
  nlohmann::json j = nlohmann::json::array();
  for (const DetectionResult& det : dets)
    j.push_back({{"image_id", det.image_id},
                 {"category_id", det.category_id},
                 {"segmentation", segmentation_to_json(det.segmentation)},
                 {"score", det.score}});
  return j;
}

DetectionDataset load_detection_gt(const std::string& path) {
  return parse_detection_gt(load_json_file(path));
}

std::vector<DetectionResult> load_detections(const std::string& path) {
  return parse_detections(load_json_file(path));
}

ApReport evaluate_detection_files(const std::string& gt_path, const std::string& det_path,
                                  const ApConfig& cfg) {
  return evaluate_detections(load_detection_gt(gt_path), load_detections(det_path), cfg);
}

}  // namespace beval
