#include "lfsim/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lfsim/error.hpp"

namespace lfsim {

namespace {

// Projected blob extent for a panel dimension at a range, foreshortened by
// cos_aspect (1 when the panel squarely faces the camera).
double projected_px(double focal, double metres, double cos_aspect, double range) {
  return focal * metres * cos_aspect / range;
}

}  // namespace

double CameraIntrinsics::focal_px() const {
  return (image_width / 2.0) / std::tan(horizontal_fov / 2.0);
}

void CameraIntrinsics::validate() const {
  if (image_width <= 0 || image_width % 2 != 0) {
    throw Error("camera image_width must be an even positive integer");
  }
  if (image_height <= 0) throw Error("camera image_height must be positive");
  if (!(horizontal_fov > 0.0 && horizontal_fov < std::numbers::pi)) {
    throw Error("camera horizontal_fov must lie in (0, pi)");
  }
  if (!(frame_rate > 0.0) || !std::isfinite(frame_rate)) {
    throw Error("camera frame_rate must be positive");
  }
  if (!(min_range > 0.0) || !(max_range > min_range) || !std::isfinite(max_range)) {
    throw Error("camera range limits must satisfy 0 < min_range < max_range");
  }
  if (!(jitter_px >= 0.0) || !std::isfinite(jitter_px)) {
    throw Error("camera jitter_px must be a non-negative number");
  }
  const double f = focal_px();
  if (!std::isfinite(f) || !(f > 0.0)) throw Error("camera focal length is degenerate");
}

void TargetPanel::validate() const {
  if (!(width > 0.0) || !(height > 0.0)) throw Error("panel dimensions must be positive");
  if (!std::isfinite(mount_offset)) throw Error("panel mount_offset must be finite");
}

double PixelJitter::sample() {
  if (half_width_ == 0.0) return 0.0;
  std::uniform_real_distribution<double> dist(-half_width_, half_width_);
  return dist(rng_);
}

std::optional<SensorReading> observe(const CameraIntrinsics& camera,
                                     const VehicleState& follower,
                                     const VehicleState& leader, const TargetPanel& panel,
                                     double t, PixelJitter* jitter) {
  const double lc = std::cos(leader.heading);
  const double ls = std::sin(leader.heading);
  const double panel_x = leader.x - panel.mount_offset * lc;
  const double panel_y = leader.y - panel.mount_offset * ls;

  const double dx = panel_x - follower.x;
  const double dy = panel_y - follower.y;
  const double fc = std::cos(follower.heading);
  const double fs = std::sin(follower.heading);

  const double forward = dx * fc + dy * fs;
  const double right = dx * fs - dy * fc;
  if (!(forward > 0.0)) return std::nullopt;

  const double range = std::hypot(dx, dy);
  if (range < camera.min_range || range > camera.max_range) return std::nullopt;
  if (std::abs(std::atan2(right, forward)) > camera.horizontal_fov / 2.0) return std::nullopt;

  // Only the rear face carries the colour patch.
  if (!(dx * lc + dy * ls > 0.0)) return std::nullopt;
  const double cos_aspect = fc * lc + fs * ls;
  if (!(cos_aspect > 0.0)) return std::nullopt;

  const double f = camera.focal_px();
  const double w = std::min(projected_px(f, panel.width, cos_aspect, range),
                            static_cast<double>(camera.image_width));
  const double h = std::min(projected_px(f, panel.height, 1.0, range),
                            static_cast<double>(camera.image_height));
  if (w < 1.0 || h < 1.0) return std::nullopt;

  double x = camera.center_x() + f * right / forward;
  if (jitter) x += jitter->sample();
  x = std::clamp(x, 0.0, static_cast<double>(camera.image_width));

  return SensorReading{x, camera.center_y(), w, h, w * h, t};
}

double head_on_area(const CameraIntrinsics& camera, const TargetPanel& panel, double range) {
  const double f = camera.focal_px();
  return projected_px(f, panel.width, 1.0, range) * projected_px(f, panel.height, 1.0, range);
}

double range_for_area(const CameraIntrinsics& camera, const TargetPanel& panel, double area) {
  if (!(area > 0.0)) throw Error("range_for_area: area must be positive");
  const double f = camera.focal_px();
  return f * std::sqrt(panel.width * panel.height / area);
}

double pixel_error_x(const SensorReading& reading, const CameraIntrinsics& camera) {
  return reading.x_px - camera.center_x();
}

double area_error(const SensorReading& reading, double setpoint_area) {
  if (!(setpoint_area > 0.0)) throw Error("area_error: setpoint must be positive");
  return setpoint_area - reading.area_px2;
}

}  // namespace lfsim
