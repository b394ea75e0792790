#include "ipid/discretization.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ipid {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double Primitive::volume() const {
  switch (kind) {
    case PrimitiveKind::Box:
      return dimensions.x() * dimensions.y() * dimensions.z();
    case PrimitiveKind::Cylinder:
      return M_PI * dimensions.x() * dimensions.x() * dimensions.y();
    case PrimitiveKind::Sphere:
      return 4.0 / 3.0 * M_PI * std::pow(dimensions.x(), 3);
    case PrimitiveKind::PointMass:
      return 0.0;
  }
  return 0.0;
}

bool Primitive::contains(const Vec3& point_body) const {
  if (!has_volume()) return false;
  const Vec3 p = rotation.transpose() * (point_body - translation);
  switch (kind) {
    case PrimitiveKind::Box:
      return std::abs(p.x()) <= 0.5 * dimensions.x() &&
             std::abs(p.y()) <= 0.5 * dimensions.y() &&
             std::abs(p.z()) <= 0.5 * dimensions.z();
    case PrimitiveKind::Cylinder:
      return p.head<2>().norm() <= dimensions.x() &&
             std::abs(p.z()) <= 0.5 * dimensions.y();
    case PrimitiveKind::Sphere:
      return p.norm() <= dimensions.x();
    default:
      return false;
  }
}

InertialParams Primitive::analytic_params() const {
  InertialParams local;
  Mat3 J_local = Mat3::Zero();
  switch (kind) {
    case PrimitiveKind::Box: {
      local.mass = density * volume();
      const Vec3 d = dimensions;
      J_local = local.mass / 12.0 *
                Vec3(d.y() * d.y() + d.z() * d.z(),
                     d.x() * d.x() + d.z() * d.z(),
                     d.x() * d.x() + d.y() * d.y()).asDiagonal();
      break;
    }
    case PrimitiveKind::Cylinder: {
      local.mass = density * volume();
      const double r2 = dimensions.x() * dimensions.x();
      const double h2 = dimensions.y() * dimensions.y();
      J_local = local.mass *
                Vec3((3.0 * r2 + h2) / 12.0, (3.0 * r2 + h2) / 12.0, r2 / 2.0).asDiagonal();
      break;
    }
    case PrimitiveKind::Sphere: {
      local.mass = density * volume();
      J_local = 0.4 * local.mass * dimensions.x() * dimensions.x() * Mat3::Identity();
      break;
    }
    case PrimitiveKind::PointMass:
      local.mass = point_mass;
      break;
  }
  local.set_inertia_matrix(J_local);
  return transform_params(local, rotation, translation);
}

bool ShapeSpec::contains(const Vec3& point_body) const {
  for (const auto& prim : primitives)
    if (prim.contains(point_body)) return true;
  return false;
}

double ShapeSpec::volume() const {
  double v = 0.0;
  for (const auto& prim : primitives) v += prim.volume();
  return v;
}

void ShapeSpec::bounding_box(Vec3& lo, Vec3& hi) const {
  lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  hi = -lo;
  bool any = false;
  for (const auto& prim : primitives) {
    if (!prim.has_volume()) continue;
    any = true;
    // Conservative: box of the primitive's own bounding sphere-ish extents,
    // tight for axis-aligned primitives.
    Vec3 half;
    switch (prim.kind) {
      case PrimitiveKind::Box: {
        const Mat3 absR = prim.rotation.cwiseAbs();
        half = 0.5 * absR * prim.dimensions;
        break;
      }
      case PrimitiveKind::Cylinder: {
        const Mat3 absR = prim.rotation.cwiseAbs();
        half = absR * Vec3(prim.dimensions.x(), prim.dimensions.x(), 0.5 * prim.dimensions.y());
        break;
      }
      case PrimitiveKind::Sphere:
        half = Vec3::Constant(prim.dimensions.x());
        break;
      default:
        half = Vec3::Zero();
    }
    lo = lo.cwiseMin(prim.translation - half);
    hi = hi.cwiseMax(prim.translation + half);
  }
  if (!any) throw std::invalid_argument("shape has no volumetric primitive");
}

Vec3 ShapeSpec::extent() const {
  Vec3 lo, hi;
  bounding_box(lo, hi);
  return hi - lo;
}

InertialParams ShapeSpec::analytic_params() const {
  InertialParams total;
  total.frame = "body";
  Mat3 J = Mat3::Zero();
  for (const auto& prim : primitives) {
    const InertialParams p = prim.analytic_params();
    total.mass += p.mass;
    total.first_moment += p.first_moment;
    J += p.inertia_matrix();
  }
  total.set_inertia_matrix(J);
  if (total.mass <= 0.0) throw std::invalid_argument("shape has non-positive total mass");
  return total;
}

namespace {

// One lattice axis, symmetric about `center` for the canonical phase.
// Node-centered lattices give odd counts (a point exactly at the centre),
// cell-centered even counts; pick whichever is closer to the ideal L/h.
std::vector<double> canonical_axis(double center, double length, double h) {
  const double ideal = length / h;
  const long k_node = static_cast<long>(std::floor(length / (2.0 * h)));
  const long n_node = 2 * k_node + 1;
  const long n_cell = 2 * static_cast<long>(std::floor(length / (2.0 * h) + 0.5));
  std::vector<double> out;
  if (n_cell == 0 ||
      std::abs(static_cast<double>(n_node) - ideal) <=
          std::abs(static_cast<double>(n_cell) - ideal)) {
    for (long k = -k_node; k <= k_node; ++k) out.push_back(center + k * h);
  } else {
    for (long k = -n_cell / 2; k < n_cell / 2; ++k) out.push_back(center + (k + 0.5) * h);
  }
  return out;
}

std::vector<double> phased_axis(double lo, double hi, double h, double phase) {
  std::vector<double> out;
  for (double x = lo + phase * h; x <= hi + 1e-15; x += h) out.push_back(x);
  return out;
}

Vec3 volume_centroid(const ShapeSpec& shape) {
  double v = 0.0;
  Vec3 c = Vec3::Zero();
  for (const auto& prim : shape.primitives) {
    if (!prim.has_volume()) continue;
    v += prim.volume();
    c += prim.volume() * prim.translation;
  }
  return c / v;
}

}  // namespace

SampleResult sample_points(const ShapeSpec& shape, double density, std::uint64_t seed) {
  if (density <= 0.0) throw std::invalid_argument("density must be positive");
  if (shape.volume() <= 0.0) throw std::invalid_argument("shape has zero volume");

  const double h = 0.01 * std::pow(density, -1.0 / 3.0);  // points/cm^3 -> metres
  Vec3 lo, hi;
  shape.bounding_box(lo, hi);

  std::array<std::vector<double>, 3> axes;
  if (seed == 0) {
    for (int i = 0; i < 3; ++i)
      axes[i] = canonical_axis(0.5 * (lo(i) + hi(i)), hi(i) - lo(i), h);
  } else {
    std::uint64_t s = seed;
    for (int i = 0; i < 3; ++i) {
      const double phase = static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
      axes[i] = phased_axis(lo(i), hi(i), h, phase);
    }
  }

  std::vector<Vec3> kept;
  for (double x : axes[0])
    for (double y : axes[1])
      for (double z : axes[2]) {
        const Vec3 p(x, y, z);
        if (shape.contains(p)) kept.push_back(p);
      }

  SampleResult result;
  result.spacing = h;
  if (kept.empty()) {
    result.positions.resize(1, 3);
    result.positions.row(0) = volume_centroid(shape).transpose();
    result.centroid_fallback = true;
    return result;
  }
  result.positions.resize(static_cast<Eigen::Index>(kept.size()), 3);
  for (Eigen::Index i = 0; i < result.positions.rows(); ++i)
    result.positions.row(i) = kept[static_cast<std::size_t>(i)].transpose();
  return result;
}

InertialParams aggregate(const PointMassModel& model) {
  if (model.size() < 1) throw std::invalid_argument("point mass model is empty");
  if (model.masses.size() != model.size())
    throw std::invalid_argument("positions/masses size mismatch");
  const double total = model.masses.sum();
  if (total <= 0.0) throw std::invalid_argument("all point masses are zero");

  InertialParams out;
  out.frame = "body";
  out.mass = total;
  Mat3 J = Mat3::Zero();
  for (Eigen::Index i = 0; i < model.size(); ++i) {
    const Vec3 p = model.positions.row(i).transpose();
    const double m = model.masses(i);
    out.first_moment += m * p;
    J += m * (p.squaredNorm() * Mat3::Identity() - p * p.transpose());
  }
  out.set_inertia_matrix(J);
  return out;
}

namespace {

// Occupancy patterns for the eight benchmark configurations. Grid rows run
// along y (iy), columns along x (ix); steel rows sit at the +y edge.
std::array<SlotFill, 16> make_layout(TestObjectConfig config) {
  std::array<SlotFill, 16> slots{};
  auto at = [&slots](int ix, int iy) -> SlotFill& { return slots[static_cast<std::size_t>(iy * 4 + ix)]; };
  switch (config) {
    case TestObjectConfig::Hammer:
      for (int ix = 0; ix < 4; ++ix) at(ix, 3) = SlotFill::Steel;     // head
      for (int ix : {1, 2})
        for (int iy : {0, 1, 2}) at(ix, iy) = SlotFill::Abs;          // handle
      break;
    case TestObjectConfig::Barbell:
      for (int ix = 0; ix < 4; ++ix) {
        at(ix, 0) = SlotFill::Steel;
        at(ix, 3) = SlotFill::Steel;
      }
      break;
    case TestObjectConfig::Tee:
      for (int ix = 0; ix < 4; ++ix) at(ix, 3) = SlotFill::Steel;
      for (int ix : {1, 2})
        for (int iy : {0, 1, 2}) at(ix, iy) = SlotFill::Steel;
      break;
    case TestObjectConfig::Uniform:
      slots.fill(SlotFill::Steel);
      break;
    case TestObjectConfig::Corners:
      at(0, 0) = at(3, 0) = at(0, 3) = at(3, 3) = SlotFill::Steel;
      break;
    case TestObjectConfig::Rod:
      for (int iy = 0; iy < 4; ++iy) {
        at(1, iy) = SlotFill::Steel;
        at(2, iy) = SlotFill::Steel;
      }
      break;
    case TestObjectConfig::HalfNHalf:
      for (int iy = 0; iy < 4; ++iy) {
        at(0, iy) = SlotFill::Steel;
        at(1, iy) = SlotFill::Steel;
        at(2, iy) = SlotFill::Abs;
        at(3, iy) = SlotFill::Abs;
      }
      break;
    case TestObjectConfig::Empty:
      break;
  }
  return slots;
}

}  // namespace

std::array<SlotFill, 16> slot_layout(TestObjectConfig config) { return make_layout(config); }

Vec3 slot_position(const TestObjectGeometry& geom, int ix, int iy) {
  const double half = 1.5 * geom.slot_pitch;
  return Vec3(-half + ix * geom.slot_pitch, -half + iy * geom.slot_pitch, 0.0);
}

TestObject build_test_object(TestObjectConfig config, const TestObjectGeometry& geom) {
  TestObject obj;
  obj.config = config;

  Primitive plate;
  plate.kind = PrimitiveKind::Box;
  plate.dimensions = geom.plate_dims;
  plate.density = geom.plate_density;
  obj.shape.primitives.push_back(plate);
  obj.shape.name = to_string(config);

  const auto slots = slot_layout(config);
  for (int iy = 0; iy < 4; ++iy)
    for (int ix = 0; ix < 4; ++ix) {
      const SlotFill fill = slots[static_cast<std::size_t>(iy * 4 + ix)];
      if (fill == SlotFill::Air) continue;
      Primitive payload;
      payload.kind = PrimitiveKind::PointMass;
      payload.translation = slot_position(geom, ix, iy);
      payload.point_mass = fill == SlotFill::Steel ? geom.steel_mass : geom.abs_mass;
      obj.shape.primitives.push_back(payload);
    }

  obj.truth = obj.shape.analytic_params();
  return obj;
}

const char* to_string(TestObjectConfig config) {
  switch (config) {
    case TestObjectConfig::Hammer: return "hammer";
    case TestObjectConfig::Barbell: return "barbell";
    case TestObjectConfig::Tee: return "tee";
    case TestObjectConfig::Uniform: return "uniform";
    case TestObjectConfig::Corners: return "corners";
    case TestObjectConfig::Rod: return "rod";
    case TestObjectConfig::HalfNHalf: return "half_n_half";
    case TestObjectConfig::Empty: return "empty";
  }
  return "unknown";
}

TestObjectConfig test_object_from_string(const std::string& name) {
  for (TestObjectConfig c : all_test_objects())
    if (name == to_string(c)) return c;
  throw std::invalid_argument("unknown test object configuration: " + name);
}

}  // namespace ipid
