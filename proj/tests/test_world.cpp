#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "lfsim/error.hpp"
#include "lfsim/world.hpp"

using namespace lfsim;

namespace {

constexpr double kPi = std::numbers::pi;

VehicleState run_constant(VehicleState s, const VehicleParams& p, double steer, double v, double dt,
                          double duration) {
  const auto n = static_cast<int>(std::llround(duration / dt));
  for (int i = 0; i < n; ++i) s = step_bicycle(s, p, steer, v, dt);
  return s;
}

// Closed-form pose after driving an arc of radius L / tan(delta) from the
// origin, heading 0, at constant speed v for time t.
VehicleState arc_pose(double wheelbase, double delta, double v, double t) {
  if (delta == 0.0) return {v * t, 0.0, 0.0, v};
  const double r = wheelbase / std::tan(delta);
  const double psi = v * t / r;
  return {r * std::sin(psi), r * (1.0 - std::cos(psi)), normalize_angle(psi), v};
}

double dense_distance(const std::vector<Point2>& track, double px, double py) {
  double best = INFINITY;
  for (std::size_t i = 0; i + 1 < track.size(); ++i) {
    const double len = std::hypot(track[i + 1].x - track[i].x, track[i + 1].y - track[i].y);
    const auto steps = static_cast<int>(std::ceil(len / 1e-3));
    for (int k = 0; k <= steps; ++k) {
      const double f = static_cast<double>(k) / steps;
      const double x = track[i].x + f * (track[i + 1].x - track[i].x);
      const double y = track[i].y + f * (track[i + 1].y - track[i].y);
      best = std::min(best, std::hypot(px - x, py - y));
    }
  }
  return best;
}

}  // namespace

TEST(StepBicycle, ZeroSteerAdvancesAlongHeading) {
  VehicleParams p;
  const VehicleState s0{1.0, 2.0, 0.7, 1.0};
  const auto s1 = step_bicycle(s0, p, 0.0, 1.0, 0.1);
  EXPECT_EQ(s1.heading, s0.heading);
  EXPECT_NEAR(s1.x, 1.0 + 0.1 * std::cos(0.7), 1e-12);
  EXPECT_NEAR(s1.y, 2.0 + 0.1 * std::sin(0.7), 1e-12);
  EXPECT_DOUBLE_EQ(s1.speed, 1.0);
}

TEST(StepBicycle, ConstantSteerFollowsClosedFormArc) {
  VehicleParams p;
  p.wheelbase = 0.5;
  p.max_accel = 1e9;
  VehicleState s{0, 0, 0, 1.0};
  for (double t : {1.0, 3.0, 7.5}) {
    const auto sim = run_constant(s, p, 0.1, 1.0, 1e-3, t);
    const auto ref = arc_pose(0.5, 0.1, 1.0, t);
    EXPECT_NEAR(sim.x, ref.x, 1e-6) << "t=" << t;
    EXPECT_NEAR(sim.y, ref.y, 1e-6) << "t=" << t;
    EXPECT_NEAR(std::remainder(sim.heading - ref.heading, 2 * kPi), 0.0, 1e-9);
  }
}

TEST(StepBicycle, SpeedSlewsAtMaxAccel) {
  VehicleParams p;
  const auto s = step_bicycle({0, 0, 0, 0.5}, p, 0.0, 4.0, 0.1);
  EXPECT_NEAR(s.speed, 0.7, 1e-12);
  const auto d = step_bicycle({0, 0, 0, 0.5}, p, 0.0, 0.0, 0.1);
  EXPECT_NEAR(d.speed, 0.3, 1e-12);
  // Distance under the linear ramp is the trapezoid area.
  EXPECT_NEAR(s.x, 0.1 * (0.5 + 0.7) / 2, 1e-12);
}

TEST(StepBicycle, ClampsSteerAndSpeed) {
  VehicleParams p;
  const auto a = run_constant({0, 0, 0, 1}, p, 5.0, 1.0, 1e-3, 1.0);
  const auto b = run_constant({0, 0, 0, 1}, p, p.max_steer_angle, 1.0, 1e-3, 1.0);
  EXPECT_EQ(a, b);
  const auto fast = run_constant({0, 0, 0, 3.9}, p, 0.0, 100.0, 0.01, 1.0);
  EXPECT_DOUBLE_EQ(fast.speed, p.max_speed);
}

TEST(StepBicycle, RejectsBadInput) {
  VehicleParams p;
  EXPECT_THROW(step_bicycle({0, 0, 0, 0}, p, 0.0, 1.0, 0.0), Error);
  EXPECT_THROW(step_bicycle({0, 0, 0, 0}, p, NAN, 1.0, 0.1), Error);
  EXPECT_THROW(step_bicycle({0, 0, 0, 0}, p, 0.0, -1.0, 0.1), Error);
  EXPECT_THROW(step_bicycle({INFINITY, 0, 0, 0}, p, 0.0, 1.0, 0.1), Error);
}

TEST(StepBicycle, ZeroSteerHeadingIsBitIdentical) {
  VehicleParams p;
  VehicleState s{0, 0, 2.5, 0};
  for (int i = 0; i < 5000; ++i) {
    s = step_bicycle(s, p, 0.0, (i % 7) * 0.5, 0.01);
    ASSERT_EQ(s.heading, 2.5);
  }
}

TEST(StepBicycleProperty, ArcConsistencyRandomPairs) {
  std::mt19937_64 rng(11);
  VehicleParams p;
  p.max_accel = 1e9;
  std::uniform_real_distribution<double> steer(-p.max_steer_angle, p.max_steer_angle);
  std::uniform_real_distribution<double> speed(0.1, p.max_speed);
  for (int c = 0; c < 1000; ++c) {
    const double d = steer(rng);
    const double v = speed(rng);
    const auto sim = run_constant({0, 0, 0, v}, p, d, v, 1e-3, 1.0);
    const auto ref = arc_pose(p.wheelbase, d, v, 1.0);
    ASSERT_LT(std::hypot(sim.x - ref.x, sim.y - ref.y), 1e-6) << d << ' ' << v;
  }
}

TEST(StepBicycleProperty, FiniteAndBoundedForFiniteInputs) {
  std::mt19937_64 rng(12);
  VehicleParams p;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int c = 0; c < 1000; ++c) {
    VehicleState s{100 * u(rng), 100 * u(rng), 10 * u(rng), 2.0 + 2.0 * u(rng)};
    s.heading = normalize_angle(s.heading);
    for (int k = 0; k < 20; ++k) {
      s = step_bicycle(s, p, 10 * u(rng), 3.0 + 3.0 * u(rng), 0.05 * (1.0 + u(rng)) + 1e-4);
      ASSERT_TRUE(std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.speed));
      ASSERT_GE(s.heading, -kPi);
      ASSERT_LT(s.heading, kPi);
      ASSERT_GE(s.speed, 0.0);
      ASSERT_LE(s.speed, p.max_speed);
    }
  }
}

TEST(NormalizeAngle, WrapsIntoHalfOpenRange) {
  EXPECT_DOUBLE_EQ(normalize_angle(0.3), 0.3);
  EXPECT_DOUBLE_EQ(normalize_angle(kPi), -kPi);
  EXPECT_NEAR(normalize_angle(3 * kPi + 0.1), -kPi + 0.1, 1e-12);
  EXPECT_NEAR(normalize_angle(-3 * kPi - 0.1), kPi - 0.1, 1e-12);
}

TEST(VehicleParams, Validation) {
  VehicleParams p;
  EXPECT_NO_THROW(p.validate());
  p.max_steer_angle = kPi / 2;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.wheelbase = 0.0;
  EXPECT_THROW(p.validate(), Error);
}

TEST(LeaderPose, StationaryIsConstant) {
  const VehicleState start{1, 2, 0.5, 0};
  const auto s = LeaderScript::stationary_at(start);
  for (double t : {0.0, 1.0, 1e4}) EXPECT_EQ(leader_pose(s, t), start);
}

TEST(LeaderPose, StraightLineUniformMotion) {
  const auto s = LeaderScript::straight({0, 0, 0, 0}, 1.0);
  const auto p = leader_pose(s, 2.5);
  EXPECT_NEAR(p.x, 2.5, 1e-12);
  EXPECT_NEAR(p.y, 0.0, 1e-12);
  EXPECT_EQ(p.heading, 0.0);
  EXPECT_EQ(p.speed, 1.0);
}

TEST(LeaderPose, FinishedPathHoldsLastWaypoint) {
  const auto s = LeaderScript::path({{0, 0}, {0, 3}}, 1.0);
  const auto p = leader_pose(s, 10.0);
  EXPECT_NEAR(p.x, 0.0, 1e-12);
  EXPECT_NEAR(p.y, 3.0, 1e-12);
  EXPECT_NEAR(p.heading, kPi / 2, 1e-12);
  EXPECT_EQ(p.speed, 0.0);
  const auto mid = leader_pose(s, 1.5);
  EXPECT_NEAR(mid.y, 1.5, 1e-12);
  EXPECT_EQ(mid.speed, 1.0);
}

TEST(LeaderPose, SpeedProfileIntegrates) {
  const std::vector<SpeedSegment> prof{{0, 1.0}, {2, 0.0}, {3, 2.0}};
  EXPECT_NEAR(distance_travelled(prof, 1.0), 1.0, 1e-12);
  EXPECT_NEAR(distance_travelled(prof, 2.5), 2.0, 1e-12);
  EXPECT_NEAR(distance_travelled(prof, 4.0), 4.0, 1e-12);
}

TEST(LeaderScript, Validation) {
  LeaderScript s = LeaderScript::path({{0, 0}, {0, 0}}, 1.0);
  EXPECT_THROW(s.validate(4.0), Error);
  s = LeaderScript::straight({}, 5.0);
  EXPECT_THROW(s.validate(4.0), Error);
}

TEST(LateralDeviation, OnTrackIsZero) {
  const std::vector<Point2> track{{0, 0}, {5, 0}, {5, 5}};
  EXPECT_EQ(lateral_deviation({2, 0, 0, 0}, track).distance, 0.0);
  EXPECT_EQ(lateral_deviation({5, 3, 0, 0}, track).distance, 0.0);
}

TEST(LateralDeviation, AxisAlignedSign) {
  const std::vector<Point2> track{{0, 0}, {5, 0}};
  EXPECT_NEAR(lateral_deviation({1, 0.4, 0, 0}, track).signed_distance(), 0.4, 1e-12);
  EXPECT_NEAR(lateral_deviation({1, -0.4, 0, 0}, track).signed_distance(), -0.4, 1e-12);
}

TEST(LateralDeviation, LShapedTrackMatchesDenseSampling) {
  const std::vector<Point2> track{{0, 0}, {2, 0}, {2, 2}};
  for (const auto& q : std::vector<Point2>{{1.9, 0.1}, {2.1, -0.1}, {2.3, 0.05}, {1.7, 0.4}, {2.05, 1.0}}) {
    const double d = lateral_deviation({q.x, q.y, 0, 0}, track).distance;
    EXPECT_NEAR(d, dense_distance(track, q.x, q.y), 1e-6) << q.x << ',' << q.y;
  }
}

TEST(LateralDeviation, DegenerateTrack) {
  const std::vector<Point2> one{{1, 1}};
  const auto d = lateral_deviation({4, 5, 0, 0}, one);
  EXPECT_NEAR(d.distance, 5.0, 1e-12);
  EXPECT_EQ(d.side, 0);
}

TEST(LateralDeviationProperty, RigidMotionInvariance) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int c = 0; c < 1000; ++c) {
    std::vector<Point2> track;
    for (int k = 0; k < 4; ++k) track.push_back({u(rng), u(rng)});
    const VehicleState f{u(rng), u(rng), 0, 0};
    const double th = u(rng);
    const double tx = u(rng);
    const double ty = u(rng);
    auto move = [&](double x, double y) {
      return Point2{std::cos(th) * x - std::sin(th) * y + tx, std::sin(th) * x + std::cos(th) * y + ty};
    };
    std::vector<Point2> moved;
    for (const auto& p : track) moved.push_back(move(p.x, p.y));
    const auto fm = move(f.x, f.y);
    const auto a = lateral_deviation(f, track);
    const auto b = lateral_deviation({fm.x, fm.y, 0, 0}, moved);
    ASSERT_NEAR(a.distance, b.distance, 1e-9);
    if (a.distance > 1e-6) { ASSERT_EQ(a.side, b.side); }
  }
}

TEST(LeaderTrack, IncludesLeadInAndPassedWaypoints) {
  const auto s = LeaderScript::path({{0, 0}, {2, 0}, {2, 2}}, 1.0);
  const auto tr = leader_track(s, 3.0, 10.0);
  ASSERT_GE(tr.size(), 4u);
  EXPECT_NEAR(tr.front().x, -10.0, 1e-12);
  EXPECT_NEAR(tr.back().x, 2.0, 1e-12);
  EXPECT_NEAR(tr.back().y, 1.0, 1e-12);
}

TEST(FollowingDistance, Basics) {
  EXPECT_EQ(following_distance({1, 1, 0, 0}, {1, 1, 2, 0}), 0.0);
  EXPECT_DOUBLE_EQ(following_distance({0, 0, 0, 0}, {3, 4, 0, 0}), 5.0);
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int c = 0; c < 1000; ++c) {
    const VehicleState a{u(rng), u(rng), 0, 0};
    const VehicleState b{u(rng), u(rng), 0, 0};
    ASSERT_DOUBLE_EQ(following_distance(a, b), std::hypot(b.x - a.x, b.y - a.y));
  }
}
