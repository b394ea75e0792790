#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ipid/rigid_body.hpp"

namespace ipid {

using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3>;

enum class PrimitiveKind { Box, Cylinder, Sphere, PointMass };

/// One geometric primitive posed in the body frame. Box dimensions are full
/// side lengths; cylinders are (radius, height) about their local z axis;
/// spheres use (radius). PointMass primitives carry a payload mass and no
/// volume.
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::Box;
  Vec3 dimensions = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double density = 0.0;     // kg/m^3, volumetric kinds
  double point_mass = 0.0;  // kg, PointMass kind

  bool has_volume() const { return kind != PrimitiveKind::PointMass; }
  double volume() const;
  bool contains(const Vec3& point_body) const;
  /// Exact body-frame inertial parameters of this primitive alone.
  InertialParams analytic_params() const;
};

struct ShapeSpec {
  std::vector<Primitive> primitives;
  std::string name;

  bool contains(const Vec3& point_body) const;
  double volume() const;  // sum over volumetric primitives (assumed disjoint)
  /// Axis-aligned bounding box over the volumetric primitives.
  void bounding_box(Vec3& lo, Vec3& hi) const;
  Vec3 extent() const;
  /// Ground truth by exact primitive sums.
  InertialParams analytic_params() const;
};

struct PointMassModel {
  PointMatrix positions;      // n x 3, body frame
  Eigen::VectorXd masses;     // n, non-negative

  Eigen::Index size() const { return positions.rows(); }
};

struct SampleResult {
  PointMatrix positions;
  double spacing = 0.0;         // lattice pitch in metres
  bool centroid_fallback = false;
};

/// Deterministic lattice sampling of a shape at `density` points/cm^3.
/// Seed 0 selects the canonical lattice, symmetric about the bounding-box
/// centre; other seeds shift the lattice phase. If the lattice misses the
/// shape entirely the centroid is returned instead, flagged.
SampleResult sample_points(const ShapeSpec& shape, double density, std::uint64_t seed = 0);

/// Sum point masses into the ten inertial parameters. Throws on an empty
/// model or an all-zero mass vector.
InertialParams aggregate(const PointMassModel& model);

// --- benchmark test object ------------------------------------------------

enum class TestObjectConfig {
  Hammer, Barbell, Tee, Uniform, Corners, Rod, HalfNHalf, Empty
};

enum class SlotFill : std::uint8_t { Air = 0, Steel = 1, Abs = 2 };

/// Structural plate with a 4x4 grid of payload slots. All lengths in metres,
/// masses in kg; kept as plain data so recalibration is a config change.
struct TestObjectGeometry {
  Vec3 plate_dims = Vec3(0.21, 0.235, 0.03);
  double plate_density = 1240.0;  // PLA
  double slot_pitch = 0.05;       // slots at +-1.5 and +-0.5 pitches
  double steel_mass = 0.101;
  double abs_mass = 0.017;
};

/// Slot occupancy for one benchmark configuration, row-major over the,
/// 4x4 grid (index = iy * 4 + ix; x along columns, y along rows).
std::array<SlotFill, 16> slot_layout(TestObjectConfig config);

Vec3 slot_position(const TestObjectGeometry& geom, int ix, int iy);

struct TestObject {
  ShapeSpec shape;
  InertialParams truth;
  TestObjectConfig config;
};

TestObject build_test_object(TestObjectConfig config,
                             const TestObjectGeometry& geom = TestObjectGeometry());

const char* to_string(TestObjectConfig config);
TestObjectConfig test_object_from_string(const std::string& name);
constexpr std::array<TestObjectConfig, 8> all_test_objects() {
  return {TestObjectConfig::Hammer,  TestObjectConfig::Barbell,
          TestObjectConfig::Tee,     TestObjectConfig::Uniform,
          TestObjectConfig::Corners, TestObjectConfig::Rod,
          TestObjectConfig::HalfNHalf, TestObjectConfig::Empty};
}

/// splitmix64 step; the project-wide way to derive sub-seeds.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace ipid
