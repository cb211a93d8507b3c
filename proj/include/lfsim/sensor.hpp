#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "lfsim/world.hpp"

namespace lfsim {

struct CameraIntrinsics {
  int image_width = 320;
  int image_height = 200;
  double horizontal_fov = 1.3089969389957472;  // 75 degrees
  double frame_rate = 50.0;
  double min_range = 0.3;
  double max_range = 20.0;
  // Half-width of the optional uniform jitter added to x_px. Zero disables it.
  double jitter_px = 0.0;

  double focal_px() const;
  double center_x() const { return image_width / 2.0; }
  double center_y() const { return image_height / 2.0; }
  void validate() const;
};

// Flat coloured panel on the leader's rear. The panel centre sits
// `mount_offset` metres behind the leader reference point and faces back
// along the leader's -heading.
struct TargetPanel {
  double width = 0.2159;   // 8.5 in
  double height = 0.2794;  // 11 in
  double mount_offset = 0.0;

  void validate() const;
};

// One colour-blob detection, in the units a Pixy-class camera reports.
struct SensorReading {
  double x_px = 0.0;
  double y_px = 0.0;
  double width_px = 0.0;
  double height_px = 0.0;
  double area_px2 = 0.0;
  double t = 0.0;

  bool operator==(const SensorReading&) const = default;
};

// Seeded x-pixel jitter. Holding it by value in the run keeps the sequence
// reproducible for a given seed.
class PixelJitter {
 public:
  explicit PixelJitter(std::uint64_t seed, double half_width)
      : rng_(seed), half_width_(half_width) {}
  double sample();

 private:
  std::mt19937_64 rng_;
  double half_width_;
};

// Pinhole projection of the leader's panel into the follower's camera. The
// camera sits at the follower reference point looking along its heading.
// Returns nullopt when the panel is outside the field of view, outside the
// detection range, seen from the front, or collapses below one pixel.
std::optional<SensorReading> observe(const CameraIntrinsics& camera,
                                     const VehicleState& follower,
                                     const VehicleState& leader, const TargetPanel& panel,
                                     double t, PixelJitter* jitter = nullptr);

// Blob area of a head-on panel at the given range, before clamping. Use this
// to derive an area setpoint that corresponds to a following distance.
double head_on_area(const CameraIntrinsics& camera, const TargetPanel& panel, double range);

// Inverse of head_on_area.
double range_for_area(const CameraIntrinsics& camera, const TargetPanel& panel, double area);

// Positive when the target is right of the image centre.
double pixel_error_x(const SensorReading& reading, const CameraIntrinsics& camera);

// Positive when the target looks too small, i.e. the follower should speed up.
double area_error(const SensorReading& reading, double setpoint_area);

}  // namespace lfsim
