#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "beval/sensitivity.hpp"
#include "test_util.hpp"

using namespace beval;

namespace {

std::vector<GtObject> square_family(int frame, const std::vector<int>& sides) {
  std::vector<GtObject> out;
  for (int s : sides) out.push_back(make_square_object(frame, frame, s, frame / 2, frame / 2));
  return out;
}

const SensitivityCurve& find_curve(const std::vector<SensitivityCurve>& curves,
                                   const std::string& measure) {
  for (const auto& c : curves)
    if (c.measure == measure) return c;
  REQUIRE(false);
  return curves.front();
}

// Parse the CSV back into (x, mean, std, n) tuples per (error, measure) pair.
struct CsvRow {
  std::string error_kind, measure, axis;
  double x, mean, stddev;
  long long n;
};

std::vector<CsvRow> parse_csv(const std::string& text) {
  std::vector<CsvRow> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  REQUIRE(line == "error_kind,measure,axis,x_value,mean,std,n");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    CsvRow r;
    std::istringstream ls(line);
    std::string field;
    std::getline(ls, r.error_kind, ',');
    std::getline(ls, r.measure, ',');
    std::getline(ls, r.axis, ',');
    std::getline(ls, field, ',');
    r.x = std::stod(field);
    std::getline(ls, field, ',');
    r.mean = std::stod(field);
    std::getline(ls, field, ',');
    r.stddev = std::stod(field);
    std::getline(ls, field, ',');
    r.n = std::stoll(field);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TEST_CASE("measure kind names round-trip") {
  for (MeasureKind k : {MeasureKind::PixelAccuracy, MeasureKind::MaskIoU, MeasureKind::TrimapIoU,
                        MeasureKind::FMeasure, MeasureKind::MFMeasure, MeasureKind::BoundaryIoU,
                        MeasureKind::CombinedIoU})
    CHECK(parse_measure_kind(measure_kind_name(k)) == k);
  CHECK_THROWS_AS(parse_measure_kind("bogus"), std::invalid_argument);
}

TEST_CASE("area binning edges") {
  const AreaBinning b = AreaBinning::side16_increments(4);
  REQUIRE(b.edges.size() == 4);
  CHECK(b.edges[0] == 16 * 16);
  CHECK(b.edges[1] == 32 * 32);
  CHECK(b.edges[2] == 48 * 48);
  CHECK(b.edges[3] == 64 * 64);
}

TEST_CASE("apply_error severity 0 is exact for every kind") {
  const GtObject obj = make_square_object(64, 64, 20, 32, 32);
  for (ErrorKind k : {ErrorKind::ScaleDilation, ErrorKind::ScaleErosion,
                      ErrorKind::BoundaryLocalization, ErrorKind::ObjectLocalization,
                      ErrorKind::BoundaryApproximation, ErrorKind::InnerMask}) {
    RngStream rng(5);
    CHECK(apply_error(obj, k, 0.0, rng) == obj.mask);
  }

  GtObject maskonly{obj.mask, std::nullopt};
  RngStream rng(6);
  CHECK_THROWS_AS(apply_error(maskonly, ErrorKind::BoundaryLocalization, 2.0, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_error(maskonly, ErrorKind::BoundaryApproximation, 2.0, rng),
                  std::invalid_argument);
}

TEST_CASE("severity sweep at severity 0 gives exact ones") {
  const auto gts = default_synthetic_objects(128, 128, 12, 11);
  for (ErrorKind k : {ErrorKind::ScaleDilation, ErrorKind::BoundaryLocalization,
                      ErrorKind::InnerMask}) {
    const auto curves = run_severity_sweep(
        gts, k, {0.0}, {MeasureKind::MaskIoU, MeasureKind::BoundaryIoU}, 0.02, 1);
    REQUIRE(curves.size() == 2);
    for (const auto& c : curves) {
      REQUIRE(c.points.size() == 1);
      CHECK(c.points[0].x == 0.0);
      CHECK(c.points[0].mean == 1.0);
      CHECK(c.points[0].stddev == 0.0);
      CHECK(c.points[0].n == 12);
    }
  }
}

TEST_CASE("dilation sweep: monotone decline, boundary below mask") {
  const auto gts = square_family(256, {128});
  std::vector<double> severities;
  for (int s = 0; s <= 15; ++s) severities.push_back(s);
  const auto curves =
      run_severity_sweep(gts, ErrorKind::ScaleDilation, severities,
                         {MeasureKind::MaskIoU, MeasureKind::BoundaryIoU}, 0.02, 3);
  const auto& mask_c = find_curve(curves, "mask_iou");
  const auto& bdry_c = find_curve(curves, "boundary_iou");
  REQUIRE(mask_c.points.size() == severities.size());
  REQUIRE(bdry_c.points.size() == severities.size());
  for (std::size_t i = 1; i < severities.size(); ++i) {
    CHECK(bdry_c.points[i].mean <= bdry_c.points[i - 1].mean + 1e-12);
    CHECK(bdry_c.points[i].mean < mask_c.points[i].mean);
  }
}

TEST_CASE("severity sweep determinism and point-stability under added severities") {
  const auto gts = default_synthetic_objects(200, 200, 8, 21);
  const std::vector<MeasureKind> ms = {MeasureKind::MaskIoU, MeasureKind::BoundaryIoU};
  const auto a =
      run_severity_sweep(gts, ErrorKind::ObjectLocalization, {0, 2, 4}, ms, 0.02, 7);
  const auto b =
      run_severity_sweep(gts, ErrorKind::ObjectLocalization, {0, 2, 4}, ms, 0.02, 7);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t p = 0; p < a[i].points.size(); ++p) {
      CHECK(a[i].points[p].mean == b[i].points[p].mean);
      CHECK(a[i].points[p].stddev == b[i].points[p].stddev);
    }

  // Threads must not change results.
  const auto c =
      run_severity_sweep(gts, ErrorKind::ObjectLocalization, {0, 2, 4}, ms, 0.02, 7, 4);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t p = 0; p < a[i].points.size(); ++p)
      CHECK(a[i].points[p].mean == c[i].points[p].mean);
}

TEST_CASE("aggregation matches a two-pass reference") {
  const auto gts = default_synthetic_objects(160, 160, 10, 31);
  const auto curves = run_severity_sweep(gts, ErrorKind::ScaleErosion, {3.0},
                                         {MeasureKind::MaskIoU}, 0.02, 9);
  REQUIRE(curves.size() == 1);
  const CurvePoint& pt = curves[0].points.at(0);

  // Recompute per-object values exactly as the sweep defines them.
  std::vector<double> vals;
  const int d = pixel_distance(160, 160, 0.02);
  MeasureConfig cfg;
  for (std::size_t gi = 0; gi < gts.size(); ++gi) {
    RngStream rng(derive_seed(9, gi, 0));
    const BinaryMask pred = apply_error(gts[gi], ErrorKind::ScaleErosion, 3.0, rng);
    vals.push_back(evaluate_measure(MeasureKind::MaskIoU, gts[gi].mask, pred, d, cfg));
  }
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= vals.size();
  double var = 0.0;
  for (double v : vals) var += (v - mean) * (v - mean);
  const double stddev = std::sqrt(var / vals.size());
  CHECK(pt.mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(pt.stddev == doctest::Approx(stddev).epsilon(1e-12));
  CHECK(pt.n == static_cast<long long>(vals.size()));
}

TEST_CASE("size sweep: scale bias shows in mask IoU but not boundary IoU") {
  std::vector<GtObject> gts;
  for (int side = 16; side <= 160; side += 8)
    gts.push_back(make_square_object(512, 512, side, 256, 256));
  const AreaBinning binning = AreaBinning::side16_increments(10);  // up to 160^2
  const auto curves =
      run_size_sweep(gts, ErrorKind::ScaleDilation, 5.0,
                     {MeasureKind::MaskIoU, MeasureKind::BoundaryIoU}, binning, 0.02, 13);
  const auto& mask_c = find_curve(curves, "mask_iou");
  const auto& bdry_c = find_curve(curves, "boundary_iou");

  // Mask IoU strictly improves with object size under a fixed 5 px dilation.
  for (std::size_t i = 1; i < mask_c.points.size(); ++i)
    CHECK(mask_c.points[i].mean > mask_c.points[i - 1].mean);
  CHECK(mask_c.points.back().mean - mask_c.points.front().mean > 0.1);

  // Boundary IoU stays flat once the square side clears 2d (d = 15 here, and
  // all sides >= 16 with dilation on an interior square behave uniformly).
  const int d = pixel_distance(512, 512, 0.02);
  for (std::size_t i = 0; i < bdry_c.points.size(); ++i) {
    if (bdry_c.points[i].x <= 2.0 * d * 2.0 * d) continue;
    CHECK(std::abs(bdry_c.points.back().mean - bdry_c.points[i].mean) < 0.05);
  }

  // Severity 0 flattens everything to 1.0.
  const auto flat = run_size_sweep(gts, ErrorKind::ScaleDilation, 0.0,
                                   {MeasureKind::MaskIoU}, binning, 0.02, 13);
  for (const auto& pt : flat[0].points) {
    CHECK(pt.mean == 1.0);
    CHECK(pt.stddev == 0.0);
  }
}

TEST_CASE("size sweep omits empty bins") {
  // Two tiny squares only: everything lands in the first bin.
  std::vector<GtObject> gts = {make_square_object(64, 64, 8, 32, 32),
                               make_square_object(64, 64, 10, 32, 32)};
  const auto curves = run_size_sweep(gts, ErrorKind::ScaleDilation, 2.0,
                                     {MeasureKind::MaskIoU},
                                     AreaBinning::side16_increments(6), 0.02, 1);
  REQUIRE(curves.size() == 1);
  REQUIRE(curves[0].points.size() == 1);
  CHECK(curves[0].points[0].n == 2);
}

TEST_CASE("CSV emission and parse-back") {
  std::ostringstream empty_out;
  emit_curves_csv({}, empty_out);
  CHECK(empty_out.str() == "error_kind,measure,axis,x_value,mean,std,n\n");

  SensitivityCurve curve;
  curve.error_kind = "scale_dilation";
  curve.measure = "mask_iou";
  curve.axis = "severity";
  curve.points = {{0.0, 1.0, 0.0, 5}, {2.0, 0.75, 0.125, 5}};
  std::ostringstream out;
  emit_curves_csv({curve}, out);
  const std::string text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);

  const auto rows = parse_csv(text);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].error_kind == "scale_dilation");
  CHECK(rows[0].measure == "mask_iou");
  CHECK(rows[0].axis == "severity");
  CHECK(rows[0].x == 0.0);
  CHECK(rows[0].mean == 1.0);
  CHECK(rows[1].mean == 0.75);
  CHECK(rows[1].stddev == 0.125);
  CHECK(rows[1].n == 5);
}

TEST_CASE("byte-identical CSV across repeated runs") {
  const auto gts = default_synthetic_objects(128, 128, 6, 2);
  auto render = [&] {
    const auto curves = run_severity_sweep(
        gts, ErrorKind::InnerMask, {0, 1, 3}, {MeasureKind::MaskIoU, MeasureKind::BoundaryIoU},
        0.02, 17);
    std::ostringstream out;
    emit_curves_csv(curves, out);
    return out.str();
  };
  CHECK(render() == render());
}
