// Command-line surface for the incidence-field calibration library.
//
// Subcommands: calibrate, detect, restore, synth, benchmark, posepair.
// Every run is a pure function of its inputs and --seed; all machine-readable
// output is line-delimited JSON with sorted keys and carries a hash of the
// effective configuration.
//
// Exit codes: 0 success, 2 malformed raster input, 3 calibration/pose failure,
// 1 any other error.

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Geometry>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "incalib/incalib.hpp"

using nlohmann::json;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_path;
  std::string mode = "4dof";
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool mode_given = false;
};

incalib::RunConfig effective_config(const CommonOpts& opts, int width, int height) {
  incalib::RunConfig cfg;
  if (!opts.config_path.empty()) cfg = incalib::load_run_config(opts.config_path);
  if (opts.seed_given) cfg.seed = opts.seed;
  if (opts.mode_given || cfg.mode.empty()) cfg.mode = opts.mode;
  cfg.ransac = cfg.ransac.resolved(width, height);
  // One seed drives every stream: the RANSAC and noise seeds in the config
  // file are superseded so that --seed alone pins the whole run.
  cfg.ransac.seed = incalib::Rng::derive(cfg.seed, 10);
  cfg.noise.seed = incalib::Rng::derive(cfg.seed, 11);
  return cfg;
}

class RecordSink {
 public:
  explicit RecordSink(const std::string& out_path) {
    if (!out_path.empty()) {
      file_.open(out_path, std::ios::trunc);
      if (!file_) throw std::runtime_error("cannot open for writing: " + out_path);
    }
  }
  void emit(const json& record) {
    std::ostream& os = file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout;
    os << record.dump() << '\n';
  }

 private:
  std::ofstream file_;
};

// Reads a field raster and rejects rays the format cannot represent before
// they reach the math layer, so the diagnostics carry byte offsets.
incalib::IncidenceField read_field_file(const std::string& path) {
  const incalib::RasterData raster = incalib::read_raster(path);
  if (raster.channels != 3)
    throw incalib::FormatError("expected a 3-channel field raster, got " +
                                   std::to_string(raster.channels) + " channel(s)",
                               9);
  for (std::size_t i = 2; i < raster.payload.size(); i += 3) {
    if (!(raster.payload[i] > 0.0f) || !std::isfinite(raster.payload[i]))
      throw incalib::FormatError("field ray has non-positive z component",
                                 incalib::kRasterHeaderSize + 4 * i);
  }
  return incalib::field_from_raster(raster);
}

incalib::Intrinsics read_intrinsics_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open intrinsics file: " + path);
  json j;
  in >> j;
  if (j.contains("K")) j = j.at("K");
  return j.get<incalib::Intrinsics>();
}

incalib::CropResizeTransform read_transform_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open transform file: " + path);
  json j;
  in >> j;
  if (j.contains("edit")) j = j.at("edit");
  return j.get<incalib::CropResizeTransform>();
}

incalib::CalibrationResult run_calibration(const incalib::IncidenceField& field,
                                           const incalib::RunConfig& cfg) {
  if (cfg.mode == "simple")
    return incalib::calibrate_simple(field, field.width, field.height, cfg.ransac);
  if (cfg.mode != "4dof") throw std::runtime_error("unknown mode: " + cfg.mode);
  return incalib::calibrate_4dof(field, cfg.ransac);
}

json intrinsics_json(const incalib::Intrinsics& K) { return json(K); }

void print_intrinsics(const char* label, const incalib::Intrinsics& K) {
  std::printf("%s: fx=%.9g fy=%.9g bx=%.9g by=%.9g\n", label, K.fx, K.fy, K.bx, K.by);
}

// ---------------------------------------------------------------------------
// calibrate
// ---------------------------------------------------------------------------

int cmd_calibrate(const std::string& field_path, const CommonOpts& opts) {
  const incalib::IncidenceField field = read_field_file(field_path);
  const incalib::RunConfig cfg = effective_config(opts, field.width, field.height);
  const incalib::CalibrationResult result = run_calibration(field, cfg);

  print_intrinsics("K", result.K);
  std::printf("mode: %s  score_x: %d/%d  score_y: %d/%d\n", cfg.mode.c_str(), result.score_x,
              result.total_scored, result.score_y, result.total_scored);

  RecordSink sink(opts.out_path);
  sink.emit(json{{"record", "calibration"},
                 {"input", field_path},
                 {"K", intrinsics_json(result.K)},
                 {"mode", cfg.mode},
                 {"score_x", result.score_x},
                 {"score_y", result.score_y},
                 {"total_scored", result.total_scored},
                 {"config_hash", incalib::config_hash(cfg)},
                 {"seed", cfg.seed}});
  return 0;
}

// ---------------------------------------------------------------------------
// detect / restore
// ---------------------------------------------------------------------------

json box_json(const incalib::RestorationBox& box) {
  return json{{"x_min", box.x_min()}, {"y_min", box.y_min()}, {"x_max", box.x_max()},
              {"y_max", box.y_max()}};
}

int cmd_detect(const std::string& field_path, const std::string& orig_k_path,
               const std::string& gt_delta_path, double threshold, const CommonOpts& opts) {
  const incalib::IncidenceField field = read_field_file(field_path);
  const incalib::RunConfig cfg = effective_config(opts, field.width, field.height);
  const incalib::CalibrationResult result = run_calibration(field, cfg);

  json record{{"record", "detection"},
              {"input", field_path},
              {"K_est", intrinsics_json(result.K)},
              {"threshold", threshold},
              {"config_hash", incalib::config_hash(cfg)},
              {"seed", cfg.seed}};

  incalib::ManipulationVerdict verdict;
  if (!orig_k_path.empty()) {
    const incalib::Intrinsics K_orig = read_intrinsics_json(orig_k_path);
    verdict = incalib::detect_known_original(result.K, K_orig, field.width, field.height,
                                             threshold);
    const incalib::RestorationBox box =
        incalib::restore_known_original(field.width, field.height, verdict.delta);
    record["case"] = "known_original";
    record["delta"] = json(verdict.delta);
    record["box"] = box_json(box);
    std::printf("delta: dfx=%.9g dfy=%.9g dcx=%.9g dcy=%.9g\n", verdict.delta.dfx,
                verdict.delta.dfy, verdict.delta.dcx, verdict.delta.dcy);
    std::printf("box: (%.6g, %.6g) - (%.6g, %.6g)\n", box.x_min(), box.y_min(), box.x_max(),
                box.y_max());
    if (!gt_delta_path.empty()) {
      const incalib::CropResizeTransform gt = read_transform_json(gt_delta_path);
      const incalib::RestorationBox gt_box =
          incalib::restore_known_original(field.width, field.height, gt);
      const double iou = incalib::box_iou(box, gt_box);
      record["iou"] = iou;
      std::printf("iou vs ground truth: %.9g\n", iou);
    }
  } else {
    verdict = incalib::detect_simple_assumption(result.K, field.width, field.height, threshold);
    record["case"] = "simple_assumption";
  }
  record["edited"] = verdict.edited;
  record["deviation"] = verdict.deviation;
  std::printf("verdict: %s (deviation %.9g, threshold %.9g)\n",
              verdict.edited ? "edited" : "genuine", verdict.deviation, threshold);

  RecordSink sink(opts.out_path);
  sink.emit(record);
  return 0;
}

int cmd_restore(const std::string& field_path, const std::string& orig_k_path,
                const CommonOpts& opts) {
  const incalib::IncidenceField field = read_field_file(field_path);
  const incalib::RunConfig cfg = effective_config(opts, field.width, field.height);
  const incalib::CalibrationResult result = run_calibration(field, cfg);

  json record{{"record", "restoration"},
              {"input", field_path},
              {"K_est", intrinsics_json(result.K)},
              {"config_hash", incalib::config_hash(cfg)},
              {"seed", cfg.seed}};

  if (!orig_k_path.empty()) {
    const incalib::Intrinsics K_orig = read_intrinsics_json(orig_k_path);
    const incalib::CropResizeTransform delta = incalib::delta_between(result.K, K_orig);
    const incalib::RestorationBox box =
        incalib::restore_known_original(field.width, field.height, delta);
    record["case"] = "known_original";
    record["delta"] = json(delta);
    record["box"] = box_json(box);
    std::printf("delta: dfx=%.9g dfy=%.9g dcx=%.9g dcy=%.9g\n", delta.dfx, delta.dfy, delta.dcx,
                delta.dcy);
    std::printf("original-image box: (%.6g, %.6g) - (%.6g, %.6g)\n", box.x_min(), box.y_min(),
                box.x_max(), box.y_max());
  } else {
    const incalib::RestorationPlan plan =
        incalib::restore_without_original(result.K, field.width, field.height);
    record["case"] = "without_original";
    record["delta"] = json(plan.delta);
    record["restored_width"] = plan.restored_width;
    record["restored_height"] = plan.restored_height;
    record["restored_K"] = intrinsics_json(plan.restored_K);
    std::printf("delta: dfx=%.9g dfy=%.9g dcx=%.9g dcy=%.9g\n", plan.delta.dfx, plan.delta.dfy,
                plan.delta.dcx, plan.delta.dcy);
    std::printf("restored canvas: %dx%d\n", plan.restored_width, plan.restored_height);
    print_intrinsics("restored K", plan.restored_K);
  }

  RecordSink sink(opts.out_path);
  sink.emit(record);
  return 0;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

int cmd_synth(int width, int height, int planes, double outlier_fraction, double noise_deg,
              bool apply_edit, bool simple_camera, const std::string& field_out,
              const std::string& depth_out, std::string sidecar_path, const CommonOpts& opts) {
  if (width < 2 || height < 2)
    throw std::invalid_argument("synth: dims must be at least 2x2, got " +
                                std::to_string(width) + "x" + std::to_string(height));
  if (apply_edit && !depth_out.empty())
    throw std::invalid_argument("synth: --depth-out is only available without --edit");
  incalib::RunConfig cfg = effective_config(opts, width, height);

  incalib::Rng rng(incalib::Rng::derive(cfg.seed, 12));
  const incalib::Intrinsics K = incalib::random_intrinsics(rng, width, height, simple_camera);

  json sidecar{{"record", "synthesis"},
               {"width", width},
               {"height", height},
               {"K", intrinsics_json(K)},
               {"seed", cfg.seed},
               {"config_hash", incalib::config_hash(cfg)},
               {"noise",
                json{{"outlier_fraction", outlier_fraction}, {"angular_sigma_deg", noise_deg}}}};

  incalib::IncidenceField field;
  if (apply_edit) {
    const incalib::CropResizeTransform edit = incalib::make_edit(rng, width, height);
    const incalib::Intrinsics K_eff = incalib::apply_transform(edit, K);
    field = incalib::incidence_from_intrinsics(K_eff, width, height);
    sidecar["edit"] = json(edit);
    sidecar["K_effective"] = intrinsics_json(K_eff);
  } else {
    sidecar["edit"] = nullptr;
    if (!depth_out.empty() || planes > 0) {
      const incalib::PlanarScene scene =
          incalib::make_random_planar_scene(rng, K, width, height, planes);
      field = scene.field;
      json plane_list = json::array();
      for (const auto& p : scene.planes)
        plane_list.push_back(json{{"n", {p.n.x(), p.n.y(), p.n.z()}}, {"c", p.c}});
      sidecar["planes"] = plane_list;
      if (!depth_out.empty())
        incalib::write_raster(depth_out, incalib::raster_from_depth(scene.depth));
    } else {
      field = incalib::incidence_from_intrinsics(K, width, height);
      sidecar["planes"] = json::array();
    }
  }

  if (outlier_fraction > 0.0 || noise_deg > 0.0) {
    incalib::NoiseModel noise{outlier_fraction, noise_deg, incalib::Rng::derive(cfg.seed, 13)};
    field = incalib::corrupt_field(field, noise).field;
  }

  incalib::write_raster(field_out, incalib::raster_from_field(field));
  if (sidecar_path.empty()) sidecar_path = field_out + ".json";
  {
    std::ofstream out(sidecar_path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + sidecar_path);
    out << sidecar.dump(2) << '\n';
  }
  std::printf("wrote %s (%dx%d field)%s%s\n", field_out.c_str(), width, height,
              depth_out.empty() ? "" : " + depth raster", apply_edit ? " [edited]" : "");
  print_intrinsics("K", K);

  RecordSink sink(opts.out_path);
  sink.emit(sidecar);
  return 0;
}

// ---------------------------------------------------------------------------
// benchmark
// ---------------------------------------------------------------------------

json aggregate_json(const incalib::Aggregate& agg) {
  json j{{"mean", agg.mean}, {"median", agg.median}, {"count", agg.count}};
  for (const auto& [thr, frac] : agg.accuracy) {
    char key[32];
    std::snprintf(key, sizeof(key), "acc@%g", thr);
    j[key] = frac;
  }
  return j;
}

int cmd_benchmark(int width, int height, int n_seeds, const CommonOpts& opts) {
  if (n_seeds < 1) throw std::invalid_argument("benchmark: need at least one seed");
  incalib::RunConfig cfg = effective_config(opts, width, height);
  const std::string hash = incalib::config_hash(cfg);
  RecordSink sink(opts.out_path);

  const double detect_threshold_clean = 0.02;
  const double detect_threshold_noisy = 0.05;  // frozen against calibration noise at 30% outliers
  sink.emit(json{{"record", "frozen_thresholds"},
                 {"detect_clean", detect_threshold_clean},
                 {"detect_noisy", detect_threshold_noisy},
                 {"config_hash", hash},
                 {"seed", cfg.seed}});

  // --- calibration grid: outlier fraction x angular noise ------------------
  const std::vector<double> outlier_grid = {0.0, 0.1, 0.2, 0.3, 0.4};
  const std::vector<double> noise_grid = {0.0, 0.2};
  std::printf("calibration grid (%d seeds, %dx%d):\n", n_seeds, width, height);
  std::printf("%9s %9s %12s %12s %12s %12s\n", "outliers", "noise", "mean_ef", "median_ef",
              "mean_eb", "median_eb");
  int row_index = 0;
  for (double sigma : noise_grid) {
    for (double ofrac : outlier_grid) {
      std::vector<double> efs, ebs;
      for (int s = 0; s < n_seeds; ++s) {
        const std::uint64_t master = incalib::Rng::derive(cfg.seed, 100 + 31 * row_index + s);
        incalib::Rng rng(master);
        const incalib::Intrinsics K_gt = incalib::random_intrinsics(rng, width, height);
        incalib::IncidenceField field = incalib::incidence_from_intrinsics(K_gt, width, height);
        if (ofrac > 0.0 || sigma > 0.0) {
          incalib::NoiseModel noise{ofrac, sigma, incalib::Rng::derive(master, 1)};
          field = incalib::corrupt_field(field, noise).field;
        }
        incalib::RansacConfig rcfg = cfg.ransac.resolved(width, height);
        rcfg.seed = incalib::Rng::derive(master, 2);
        const incalib::CalibrationResult result = incalib::calibrate_4dof(field, rcfg);
        const incalib::IntrinsicError err =
            incalib::intrinsic_error(result.K, K_gt, width, height);
        efs.push_back(err.e_f);
        ebs.push_back(err.e_b);
      }
      const incalib::Aggregate agg_f = incalib::aggregate(efs);
      const incalib::Aggregate agg_b = incalib::aggregate(ebs);
      std::printf("%9.2f %9.2f %12.6g %12.6g %12.6g %12.6g\n", ofrac, sigma, agg_f.mean,
                  agg_f.median, agg_b.mean, agg_b.median);
      sink.emit(json{{"record", "benchmark_calibration_row"},
                     {"outlier_fraction", ofrac},
                     {"angular_sigma_deg", sigma},
                     {"e_f", aggregate_json(agg_f)},
                     {"e_b", aggregate_json(agg_b)},
                     {"seeds", n_seeds},
                     {"config_hash", hash},
                     {"seed", cfg.seed}});
      ++row_index;
    }
  }

  // --- manipulation detection: clean and noisy suites ----------------------
  for (int noisy = 0; noisy < 2; ++noisy) {
    const double threshold = noisy ? detect_threshold_noisy : detect_threshold_clean;
    const double ofrac = noisy ? 0.3 : 0.0;
    const double sigma = noisy ? 0.2 : 0.0;
    int correct = 0, total = 0;
    std::vector<double> ious;
    for (int s = 0; s < n_seeds; ++s) {
      const std::uint64_t master = incalib::Rng::derive(cfg.seed, 5000 + 2 * s + noisy);
      incalib::Rng rng(master);
      const incalib::Intrinsics K_orig = incalib::random_intrinsics(rng, width, height);
      const incalib::CropResizeTransform edit = incalib::make_edit(rng, width, height);
      for (int edited = 0; edited < 2; ++edited) {
        const incalib::Intrinsics K_eff =
            edited ? incalib::apply_transform(edit, K_orig) : K_orig;
        incalib::IncidenceField field =
            incalib::incidence_from_intrinsics(K_eff, width, height);
        if (ofrac > 0.0 || sigma > 0.0) {
          incalib::NoiseModel noise{ofrac, sigma, incalib::Rng::derive(master, 3 + edited)};
          field = incalib::corrupt_field(field, noise).field;
        }
        incalib::RansacConfig rcfg = cfg.ransac.resolved(width, height);
        rcfg.seed = incalib::Rng::derive(master, 5 + edited);
        const incalib::CalibrationResult result = incalib::calibrate_4dof(field, rcfg);
        const incalib::ManipulationVerdict verdict =
            incalib::detect_known_original(result.K, K_orig, width, height, threshold);
        correct += (verdict.edited == static_cast<bool>(edited)) ? 1 : 0;
        ++total;
        if (edited) {
          const incalib::RestorationBox est_box =
              incalib::restore_known_original(width, height, verdict.delta);
          const incalib::RestorationBox gt_box =
              incalib::restore_known_original(width, height, edit);
          ious.push_back(incalib::box_iou(est_box, gt_box));
        }
      }
    }
    const double acc = static_cast<double>(correct) / total;
    const incalib::Aggregate agg_iou = incalib::aggregate(ious);
    std::printf("detection (%s): acc %.4g  mIOU %.6g\n", noisy ? "noisy" : "clean", acc,
                agg_iou.mean);
    sink.emit(json{{"record", "benchmark_detection"},
                   {"suite", noisy ? "noisy" : "clean"},
                   {"outlier_fraction", ofrac},
                   {"angular_sigma_deg", sigma},
                   {"threshold", threshold},
                   {"accuracy", acc},
                   {"mean_iou", agg_iou.mean},
                   {"median_iou", agg_iou.median},
                   {"seeds", n_seeds},
                   {"config_hash", hash},
                   {"seed", cfg.seed}});
  }

  // --- depth-normal solve: analytic rows vs noisy sampled depth -------------
  const double depth_sigma_rel = 0.001;
  const int dn_pixels = 500;  // two rows (one per axis) per pixel
  std::vector<double> ef_clean, ef_noisy;
  int noisy_failures = 0;
  for (int s = 0; s < n_seeds; ++s) {
    const std::uint64_t master = incalib::Rng::derive(cfg.seed, 7000 + s);
    incalib::Rng rng(master);
    const incalib::Intrinsics K_gt = incalib::random_intrinsics(rng, width, height);
    const incalib::PlanarScene scene =
        incalib::make_random_planar_scene(rng, K_gt, width, height, 4);

    incalib::DepthMap noisy_depth = scene.depth;
    for (double& d : noisy_depth.data) d *= 1.0 + rng.normal(0.0, depth_sigma_rel);
    const incalib::GradientField noisy_grad =
        incalib::depth_gradient(noisy_depth, incalib::GradientScheme::central);

    std::vector<incalib::ConstraintRow> rows_clean, rows_noisy;
    while (static_cast<int>(rows_clean.size()) < 2 * dn_pixels) {
      const int x = 1 + rng.uniform_int(width - 2);
      const int y = 1 + rng.uniform_int(height - 2);
      // Keep the x stencil inside one strip: depth is discontinuous at seams.
      if (scene.region.at(x - 1, y) != scene.region.at(x + 1, y)) continue;
      const Eigen::Vector3d& n = scene.normals.at(x, y);
      rows_clean.push_back(incalib::build_constraint_row(
          x, y, scene.depth.at(x, y), scene.grad_x.at(x, y), n, incalib::Axis::x));
      rows_clean.push_back(incalib::build_constraint_row(
          x, y, scene.depth.at(x, y), scene.grad_y.at(x, y), n, incalib::Axis::y));
      rows_noisy.push_back(incalib::build_constraint_row(
          x, y, noisy_depth.at(x, y), noisy_grad.dx.at(x, y), n, incalib::Axis::x));
      rows_noisy.push_back(incalib::build_constraint_row(
          x, y, noisy_depth.at(x, y), noisy_grad.dy.at(x, y), n, incalib::Axis::y));
    }
    const incalib::DepthNormalSolution clean = incalib::solve_least_squares(rows_clean);
    ef_clean.push_back(incalib::intrinsic_error(clean.K, K_gt, width, height).e_f);
    try {
      const incalib::DepthNormalSolution noisy = incalib::solve_least_squares(rows_noisy);
      ef_noisy.push_back(incalib::intrinsic_error(noisy.K, K_gt, width, height).e_f);
    } catch (const incalib::DegenerateConfigurationError&) {
      ++noisy_failures;  // noise pushed the system past the conditioning bound
    }
  }
  const incalib::Aggregate agg_dn_clean = incalib::aggregate(ef_clean);
  std::printf("depth-normal solve: clean median e_f %.6g", agg_dn_clean.median);
  json dn_noisy_json = nullptr;
  if (!ef_noisy.empty()) {
    const incalib::Aggregate agg_dn_noisy = incalib::aggregate(ef_noisy);
    std::printf("  noisy (rel sigma %g) median e_f %.6g", depth_sigma_rel, agg_dn_noisy.median);
    dn_noisy_json = aggregate_json(agg_dn_noisy);
  }
  std::printf("  degenerate %d\n", noisy_failures);
  sink.emit(json{{"record", "benchmark_depth_normal"},
                 {"depth_sigma_rel", depth_sigma_rel},
                 {"rows", 2 * dn_pixels},
                 {"e_f_clean", aggregate_json(agg_dn_clean)},
                 {"e_f_noisy", dn_noisy_json},
                 {"noisy_degenerate", noisy_failures},
                 {"seeds", n_seeds},
                 {"config_hash", hash},
                 {"seed", cfg.seed}});

  // --- two-view pose quality vs intrinsic quality ---------------------------
  // Correspondences are not rasters, so this suite runs on a fixed virtual
  // camera: pixel noise would otherwise change meaning with --width/--height.
  const int pose_w = 640;
  const int pose_h = 480;
  const std::vector<double> ef_grid = {0.0, 0.1};
  const std::vector<double> pose_thresholds = {5.0, 10.0, 20.0};
  for (double ef : ef_grid) {
    std::vector<double> rot_errors;
    for (int s = 0; s < n_seeds; ++s) {
      const std::uint64_t master = incalib::Rng::derive(cfg.seed, 9000 + s);
      incalib::Rng rng(master);
      const incalib::Intrinsics K1 = incalib::random_intrinsics(rng, pose_w, pose_h);
      const incalib::Intrinsics K2 = incalib::random_intrinsics(rng, pose_w, pose_h);
      const double angle = rng.uniform(0.03, 0.15);
      const Eigen::Vector3d axis =
          Eigen::Vector3d(rng.normal(0, 1), rng.normal(0, 1), rng.normal(0, 1)).normalized();
      incalib::RelativePose pose;
      pose.R = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
      pose.t = Eigen::Vector3d(rng.normal(0, 1), rng.normal(0, 1), rng.normal(0, 1)).normalized();
      try {
        const incalib::CorrespondenceSet set = incalib::synth_pair(
            rng, K1, pose_w, pose_h, K2, pose_w, pose_h, pose, 60, 0.5);
        const incalib::Intrinsics K1_est(K1.fx * (1 + ef), K1.fy * (1 + ef), K1.bx, K1.by);
        const incalib::Intrinsics K2_est(K2.fx * (1 + ef), K2.fy * (1 + ef), K2.bx, K2.by);
        const incalib::RelativePose est = incalib::pose_from_uncalibrated(set, K1_est, K2_est);
        const incalib::PoseError err = incalib::pose_error(est.R, est.t, pose.R, pose.t);
        rot_errors.push_back(std::max(err.rotation_deg, err.translation_deg));
      } catch (const incalib::DegenerateConfigurationError&) {
        continue;  // pose/frustum draw without overlap: skip the trial
      } catch (const incalib::AmbiguousPoseError&) {
        rot_errors.push_back(180.0);
      }
    }
    const incalib::Aggregate agg = incalib::aggregate(rot_errors, pose_thresholds);
    std::printf("pose (injected e_f %.2f): median err %.4g deg", ef, agg.median);
    for (const auto& [thr, frac] : agg.accuracy) std::printf("  acc@%g %.4g", thr, frac);
    std::printf("\n");
    sink.emit(json{{"record", "benchmark_pose"},
                   {"injected_e_f", ef},
                   {"pose_error", aggregate_json(agg)},
                   {"seeds", n_seeds},
                   {"config_hash", hash},
                   {"seed", cfg.seed}});
  }
  return 0;
}

// ---------------------------------------------------------------------------
// posepair
// ---------------------------------------------------------------------------

int cmd_posepair(int width, int height, int n_points, double noise_px, double injected_ef,
                 const CommonOpts& opts) {
  incalib::RunConfig cfg = effective_config(opts, width, height);
  incalib::Rng rng(incalib::Rng::derive(cfg.seed, 14));
  const incalib::Intrinsics K1 = incalib::random_intrinsics(rng, width, height);
  const incalib::Intrinsics K2 = incalib::random_intrinsics(rng, width, height);
  const double angle = rng.uniform(0.03, 0.15);
  const Eigen::Vector3d axis =
      Eigen::Vector3d(rng.normal(0, 1), rng.normal(0, 1), rng.normal(0, 1)).normalized();
  incalib::RelativePose pose;
  pose.R = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
  pose.t = Eigen::Vector3d(rng.normal(0, 1), rng.normal(0, 1), rng.normal(0, 1)).normalized();

  const incalib::CorrespondenceSet set =
      incalib::synth_pair(rng, K1, width, height, K2, width, height, pose, n_points, noise_px);
  const incalib::Intrinsics K1_est(K1.fx * (1 + injected_ef), K1.fy * (1 + injected_ef), K1.bx,
                                   K1.by);
  const incalib::Intrinsics K2_est(K2.fx * (1 + injected_ef), K2.fy * (1 + injected_ef), K2.bx,
                                   K2.by);
  const incalib::RelativePose est = incalib::pose_from_uncalibrated(set, K1_est, K2_est);
  const incalib::PoseError err = incalib::pose_error(est.R, est.t, pose.R, pose.t);

  std::printf("points: %d  pixel noise: %.3g  injected e_f: %.3g\n", n_points, noise_px,
              injected_ef);
  std::printf("rotation error: %.6g deg  translation direction error: %.6g deg\n",
              err.rotation_deg, err.translation_deg);

  RecordSink sink(opts.out_path);
  sink.emit(json{{"record", "pose"},
                 {"n_points", n_points},
                 {"noise_px", noise_px},
                 {"injected_e_f", injected_ef},
                 {"rotation_error_deg", err.rotation_deg},
                 {"translation_error_deg", err.translation_deg},
                 {"config_hash", incalib::config_hash(cfg)},
                 {"seed", cfg.seed}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"incidence-field camera calibration toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  auto* seed_opt = app.add_option("--seed", opts.seed, "master seed driving all randomness");
  auto* mode_opt = app.add_option("--mode", opts.mode, "calibration mode")
                       ->check(CLI::IsMember({"4dof", "simple"}));
  app.add_option("--config", opts.config_path, "JSON run configuration file");
  app.add_option("--out", opts.out_path, "machine-readable output path (JSON lines)");

  std::string field_path, orig_k_path, gt_delta_path, field_out, depth_out, sidecar;
  double threshold = 0.02, outliers = 0.0, noise_deg = 0.0, noise_px = 0.5, injected_ef = 0.0;
  int width = 640, height = 480, planes = 3, n_seeds = 10, n_points = 100;
  bool apply_edit = false, simple_camera = false;

  CLI::App* cal = app.add_subcommand("calibrate", "recover intrinsics from a field raster");
  cal->fallthrough();
  cal->add_option("field", field_path, "input field raster")->required();

  CLI::App* det = app.add_subcommand("detect", "detect crop/resize edits from a field raster");
  det->fallthrough();
  det->add_option("field", field_path, "input field raster")->required();
  det->add_option("--orig-K", orig_k_path, "JSON with the original intrinsics");
  det->add_option("--gt-delta", gt_delta_path, "JSON with the injected edit, for IOU");
  det->add_option("--threshold", threshold, "deviation threshold for the edited verdict");

  CLI::App* res = app.add_subcommand("restore", "estimate the edit and the restored canvas");
  res->fallthrough();
  res->add_option("field", field_path, "input field raster")->required();
  res->add_option("--orig-K", orig_k_path, "JSON with the original intrinsics");

  CLI::App* syn = app.add_subcommand("synth", "generate synthetic field/depth rasters");
  syn->fallthrough();
  syn->add_option("--width", width, "field width in pixels");
  syn->add_option("--height", height, "field height in pixels");
  syn->add_option("--planes", planes, "number of scene planes (0 = pure field, no depth)");
  syn->add_option("--outliers", outliers, "outlier fraction in [0,1]");
  syn->add_option("--noise-deg", noise_deg, "angular noise sigma in degrees");
  syn->add_flag("--edit", apply_edit, "apply a random crop/resize edit");
  syn->add_flag("--simple", simple_camera, "draw a shared-focal centered camera");
  syn->add_option("--field-out", field_out, "output field raster path")->required();
  syn->add_option("--depth-out", depth_out, "output depth raster path");
  syn->add_option("--sidecar", sidecar, "ground-truth sidecar path (default: field + .json)");

  CLI::App* ben = app.add_subcommand("benchmark", "synthetic sweep: calibration, detection, pose");
  ben->fallthrough();
  ben->add_option("--width", width, "field width in pixels");
  ben->add_option("--height", height, "field height in pixels");
  ben->add_option("--seeds", n_seeds, "trials per grid cell");

  CLI::App* pp = app.add_subcommand("posepair", "two-view pose from one synthetic pair");
  pp->fallthrough();
  pp->add_option("--width", width, "image width in pixels");
  pp->add_option("--height", height, "image height in pixels");
  pp->add_option("--points", n_points, "correspondence count");
  pp->add_option("--noise-px", noise_px, "pixel noise sigma");
  pp->add_option("--injected-ef", injected_ef, "relative focal perturbation of the intrinsics");

  CLI11_PARSE(app, argc, argv);
  opts.seed_given = seed_opt->count() > 0;
  opts.mode_given = mode_opt->count() > 0;

  try {
    if (cal->parsed()) return cmd_calibrate(field_path, opts);
    if (det->parsed()) return cmd_detect(field_path, orig_k_path, gt_delta_path, threshold, opts);
    if (res->parsed()) return cmd_restore(field_path, orig_k_path, opts);
    if (syn->parsed())
      return cmd_synth(width, height, planes, outliers, noise_deg, apply_edit, simple_camera,
                       field_out, depth_out, sidecar, opts);
    if (ben->parsed()) return cmd_benchmark(width, height, n_seeds, opts);
    if (pp->parsed()) return cmd_posepair(width, height, n_points, noise_px, injected_ef, opts);
  } catch (const incalib::FormatError& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return 2;
  } catch (const incalib::CalibrationFailedError& e) {
    std::fprintf(stderr, "calibration failed: %s\n", e.what());
    return 3;
  } catch (const incalib::AmbiguousPoseError& e) {
    std::fprintf(stderr, "pose selection failed: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
