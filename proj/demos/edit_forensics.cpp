// Demo: detect and undo a crop/resize edit from the incidence field alone.
//
// Applies a random resize-then-crop to a random camera, calibrates the edited
// field, and reports the recovered edit, the restoration box in original
// pixels, and its overlap with the injected ground truth.

#include <cstdio>
#include <cstdlib>

#include "incalib/incalib.hpp"

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 42;
  const int width = 640, height = 480;

  incalib::Rng rng(seed);
  const incalib::Intrinsics K = incalib::random_intrinsics(rng, width, height);
  const incalib::CropResizeTransform edit = incalib::make_edit(rng, width, height);
  const incalib::Intrinsics K_edited = incalib::apply_transform(edit, K);
  std::printf("original:  fx=%.2f fy=%.2f b=(%.1f, %.1f)\n", K.fx, K.fy, K.bx, K.by);
  std::printf("edit:      scale=(%.3f, %.3f) crop=(%.0f, %.0f)\n", edit.dfx, edit.dfy,
              -edit.dcx, -edit.dcy);

  // The edited image's network-predicted field, then calibration.
  const incalib::IncidenceField field =
      incalib::incidence_from_intrinsics(K_edited, width, height);
  incalib::RansacConfig cfg = incalib::RansacConfig::defaults(width, height);
  cfg.seed = incalib::Rng::derive(seed, 1);
  const incalib::Intrinsics K_est = incalib::calibrate_4dof(field, cfg).K;

  const incalib::ManipulationVerdict verdict =
      incalib::detect_known_original(K_est, K, width, height);
  std::printf("verdict:   %s (deviation %.4g)\n", verdict.edited ? "edited" : "genuine",
              verdict.deviation);
  std::printf("recovered: scale=(%.3f, %.3f) crop=(%.1f, %.1f)\n", verdict.delta.dfx,
              verdict.delta.dfy, -verdict.delta.dcx, -verdict.delta.dcy);

  const incalib::RestorationBox est = incalib::restore_known_original(width, height,
                                                                      verdict.delta);
  const incalib::RestorationBox gt = incalib::restore_known_original(width, height, edit);
  std::printf("box:       (%.1f, %.1f) - (%.1f, %.1f) in the original image\n", est.x_min(),
              est.y_min(), est.x_max(), est.y_max());
  std::printf("iou:       %.6f vs injected edit\n", incalib::box_iou(est, gt));

  // Without the original there is still a canonical undo: assume the source
  // was a centered shared-focal camera and rescale back to it.
  const incalib::RestorationPlan plan =
      incalib::restore_without_original(K_est, width, height);
  std::printf("blind:     restored canvas %dx%d, f=%.2f\n", plan.restored_width,
              plan.restored_height, plan.restored_K.fx);
  return 0;
}
