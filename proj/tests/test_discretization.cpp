#include <doctest.h>

#include <set>

#include "ipid/discretization.hpp"
#include "test_util.hpp"

using namespace ipid;

namespace {

ShapeSpec unit_box() {
  ShapeSpec shape;
  Primitive box;
  box.kind = PrimitiveKind::Box;
  box.dimensions = Vec3(1, 1, 1);
  box.density = 1.0;
  shape.primitives.push_back(box);
  return shape;
}

ShapeSpec solid_box(const Vec3& dims, double density_kg_m3) {
  ShapeSpec shape;
  Primitive box;
  box.kind = PrimitiveKind::Box;
  box.dimensions = dims;
  box.density = density_kg_m3;
  shape.primitives.push_back(box);
  return shape;
}

}  // namespace

TEST_CASE("containment basics") {
  const ShapeSpec box = unit_box();
  CHECK(box.contains(Vec3(0, 0, 0)));
  CHECK(box.contains(Vec3(0.5, 0.5, 0.5)));  // boundary counts
  CHECK_FALSE(box.contains(Vec3(0.51, 0, 0)));

  ShapeSpec sphere;
  Primitive s;
  s.kind = PrimitiveKind::Sphere;
  s.dimensions = Vec3(0.1, 0, 0);
  s.translation = Vec3(1, 0, 0);
  s.density = 1.0;
  sphere.primitives.push_back(s);
  CHECK(sphere.contains(Vec3(1.05, 0, 0)));
  CHECK_FALSE(sphere.contains(Vec3(1.2, 0, 0)));
}

TEST_CASE("cylinder containment and analytic params") {
  Primitive cyl;
  cyl.kind = PrimitiveKind::Cylinder;
  cyl.dimensions = Vec3(0.05, 0.2, 0);  // radius, height
  cyl.density = 1000.0;
  CHECK(cyl.contains(Vec3(0.05, 0, 0.1)));
  CHECK_FALSE(cyl.contains(Vec3(0.06, 0, 0)));
  CHECK_FALSE(cyl.contains(Vec3(0, 0, 0.11)));

  const InertialParams p = cyl.analytic_params();
  const double m = 1000.0 * M_PI * 0.05 * 0.05 * 0.2;
  CHECK(p.mass == doctest::Approx(m));
  CHECK(p.inertia(5) == doctest::Approx(0.5 * m * 0.05 * 0.05));
}

TEST_CASE("default test object samples to 56 points at the flagship density") {
  const TestObject obj = build_test_object(TestObjectConfig::Uniform);
  const SampleResult sample = sample_points(obj.shape, 0.04);
  CHECK(sample.positions.rows() == 56);
  CHECK_FALSE(sample.centroid_fallback);

  // Canonical lattice is symmetric: the thin plate keeps one layer at the
  // mid-plane, so aggregate COM stays on the true symmetry plane.
  for (Eigen::Index i = 0; i < sample.positions.rows(); ++i) {
    CHECK(obj.shape.contains(sample.positions.row(i).transpose()));
    CHECK(sample.positions(i, 2) == doctest::Approx(0.0));
  }

  // Count tracks density * volume.
  const double ideal = 0.04 * obj.shape.volume() * 1e6;
  CHECK(std::abs(56.0 / ideal - 1.0) < 0.2);
}

TEST_CASE("doubling the density scales the count by about eight") {
  const ShapeSpec box = solid_box(Vec3(0.2, 0.1, 0.05), 1000.0);
  const auto n1 = sample_points(box, 1.0).positions.rows();
  const auto n8 = sample_points(box, 8.0).positions.rows();
  CHECK(std::abs(static_cast<double>(n8) / static_cast<double>(n1) - 8.0) < 1.6);
  const double ideal = 1.0 * box.volume() * 1e6;
  CHECK(std::abs(static_cast<double>(n1) / ideal - 1.0) < 0.2);
}

TEST_CASE("sampling is deterministic and seed shifts the lattice") {
  const ShapeSpec box = solid_box(Vec3(0.2, 0.1, 0.05), 1000.0);
  const SampleResult a = sample_points(box, 0.25, 5);
  const SampleResult b = sample_points(box, 0.25, 5);
  REQUIRE(a.positions.rows() == b.positions.rows());
  CHECK((a.positions - b.positions).cwiseAbs().maxCoeff() == 0.0);  // bit exact

  const SampleResult c = sample_points(box, 0.25, 6);
  const bool same = c.positions.rows() == a.positions.rows() &&
                    (c.positions - a.positions).cwiseAbs().maxCoeff() == 0.0;
  CHECK_FALSE(same);
}

TEST_CASE("degenerate sampling falls back to the centroid") {
  ShapeSpec tiny;
  Primitive s;
  s.kind = PrimitiveKind::Sphere;
  s.dimensions = Vec3(0.001, 0, 0);
  s.density = 1000.0;
  tiny.primitives.push_back(s);

  // Canonical lattice always contains the symmetric centre point.
  const SampleResult canonical = sample_points(tiny, 0.001, 0);
  CHECK_FALSE(canonical.centroid_fallback);

  // A shifted phase misses the sphere entirely and flags the fallback.
  const SampleResult shifted = sample_points(tiny, 0.001, 1);
  CHECK(shifted.centroid_fallback);
  CHECK(shifted.positions.rows() == 1);
  CHECK(shifted.positions.row(0).norm() < 1e-12);

  CHECK_THROWS_AS(sample_points(tiny, -1.0, 0), std::invalid_argument);
  ShapeSpec empty;
  CHECK_THROWS_AS(sample_points(empty, 1.0, 0), std::invalid_argument);
}

TEST_CASE("aggregate basics") {
  SUBCASE("single point") {
    PointMassModel m;
    m.positions.resize(1, 3);
    m.positions.row(0) = Vec3(0, 0, 1).transpose();
    m.masses.resize(1);
    m.masses << 1.0;
    const InertialParams p = aggregate(m);
    CHECK(p.mass == doctest::Approx(1.0));
    CHECK((p.com() - Vec3(0, 0, 1)).norm() < 1e-15);
    CHECK(p.inertia(0) == doctest::Approx(1.0));
    CHECK(p.inertia(3) == doctest::Approx(1.0));
    CHECK(p.inertia(5) == doctest::Approx(0.0));
  }

  SUBCASE("symmetric pair") {
    PointMassModel m;
    m.positions.resize(2, 3);
    m.positions.row(0) = Vec3(1, 0, 0).transpose();
    m.positions.row(1) = Vec3(-1, 0, 0).transpose();
    m.masses = Eigen::VectorXd::Constant(2, 0.5);
    const InertialParams p = aggregate(m);
    CHECK(p.first_moment.norm() < 1e-15);
    CHECK(p.inertia(0) == doctest::Approx(0.0));
    CHECK(p.inertia(3) == doctest::Approx(1.0));
    CHECK(p.inertia(5) == doctest::Approx(1.0));
  }

  SUBCASE("error paths") {
    PointMassModel empty;
    empty.positions.resize(0, 3);
    empty.masses.resize(0);
    CHECK_THROWS_AS(aggregate(empty), std::invalid_argument);

    PointMassModel zeros;
    zeros.positions = PointMatrix::Zero(3, 3);
    zeros.masses = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(aggregate(zeros), std::invalid_argument);
  }
}

TEST_CASE("uniform box sampling approaches the analytic inertia") {
  const Vec3 dims(0.2, 0.1, 0.05);
  const ShapeSpec box = solid_box(dims, 1000.0);
  const SampleResult sample = sample_points(box, 1.0);
  PointMassModel model;
  model.positions = sample.positions;
  model.masses =
      Eigen::VectorXd::Constant(sample.positions.rows(), 1.0 / static_cast<double>(sample.positions.rows()));
  const InertialParams agg = aggregate(model);

  const Vec3 analytic(dims.y() * dims.y() + dims.z() * dims.z(),
                      dims.x() * dims.x() + dims.z() * dims.z(),
                      dims.x() * dims.x() + dims.y() * dims.y());
  for (int i = 0; i < 3; ++i) {
    const double expected = analytic(i) / 12.0;  // total mass normalized to 1
    const double got = agg.inertia_matrix()(i, i);
    CHECK(std::abs(got - expected) / expected < 0.05);
  }
}

TEST_CASE("aggregation is additive over disjoint point sets") {
  std::mt19937_64 rng(41);
  PointMassModel a, b, both;
  a.positions = testutil::random_points(rng, 5);
  b.positions = testutil::random_points(rng, 4);
  a.masses = Eigen::VectorXd::Random(5).cwiseAbs();
  b.masses = Eigen::VectorXd::Random(4).cwiseAbs();
  both.positions.resize(9, 3);
  both.positions << a.positions, b.positions;
  both.masses.resize(9);
  both.masses << a.masses, b.masses;

  const Vec10 sum = aggregate(a).to_vector() + aggregate(b).to_vector();
  CHECK((aggregate(both).to_vector() - sum).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("test object ground truths") {
  SUBCASE("empty and uniform differ exactly by the payload sums") {
    const TestObject empty = build_test_object(TestObjectConfig::Empty);
    const TestObject uniform = build_test_object(TestObjectConfig::Uniform);
    const TestObjectGeometry geom;

    InertialParams payload;
    Mat3 J = Mat3::Zero();
    for (int iy = 0; iy < 4; ++iy)
      for (int ix = 0; ix < 4; ++ix) {
        const Vec3 p = slot_position(geom, ix, iy);
        payload.mass += geom.steel_mass;
        payload.first_moment += geom.steel_mass * p;
        J += geom.steel_mass * (p.squaredNorm() * Mat3::Identity() - p * p.transpose());
      }
    payload.set_inertia_matrix(J);

    const Vec10 diff = uniform.truth.to_vector() - empty.truth.to_vector();
    CHECK((diff - payload.to_vector()).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("barbell COM sits on the symmetry axis") {
    const TestObject barbell = build_test_object(TestObjectConfig::Barbell);
    CHECK(barbell.truth.com().norm() < 1e-12);
  }

  SUBCASE("hammer golden values from the primitive-sum oracle") {
    const TestObject hammer = build_test_object(TestObjectConfig::Hammer);
    // Frozen from the exact sum: plate 0.21 x 0.235 x 0.03 m at 1240 kg/m^3,
    // steel head row at y = +0.075, two-column ABS handle.
    CHECK(hammer.truth.mass == doctest::Approx(2.34182).epsilon(1e-12));
    CHECK(hammer.truth.first_moment.x() == doctest::Approx(0.0));
    CHECK(hammer.truth.first_moment.y() == doctest::Approx(0.02775).epsilon(1e-12));
    CHECK(hammer.truth.first_moment.z() == doctest::Approx(0.0));
    CHECK(hammer.truth.inertia(0) == doctest::Approx(0.011092533125).epsilon(1e-12));
    CHECK(hammer.truth.inertia(3) == doctest::Approx(0.008210575).epsilon(1e-12));
    CHECK(hammer.truth.inertia(5) == doctest::Approx(0.019027735125).epsilon(1e-12));
    CHECK(std::abs(hammer.truth.inertia(1)) + std::abs(hammer.truth.inertia(2)) +
              std::abs(hammer.truth.inertia(4)) ==
          doctest::Approx(0.0));

    // Independent re-computation in test code.
    const TestObjectGeometry geom;
    double mass = geom.plate_density * geom.plate_dims.prod();
    Vec3 h = Vec3::Zero();
    Mat3 J = mass / 12.0 *
             Vec3(geom.plate_dims.y() * geom.plate_dims.y() + geom.plate_dims.z() * geom.plate_dims.z(),
                  geom.plate_dims.x() * geom.plate_dims.x() + geom.plate_dims.z() * geom.plate_dims.z(),
                  geom.plate_dims.x() * geom.plate_dims.x() + geom.plate_dims.y() * geom.plate_dims.y())
                 .asDiagonal()
                 .toDenseMatrix();
    const auto layout = slot_layout(TestObjectConfig::Hammer);
    for (int iy = 0; iy < 4; ++iy)
      for (int ix = 0; ix < 4; ++ix) {
        const SlotFill fill = layout[static_cast<std::size_t>(iy * 4 + ix)];
        if (fill == SlotFill::Air) continue;
        const double m = fill == SlotFill::Steel ? geom.steel_mass : geom.abs_mass;
        const Vec3 p = slot_position(geom, ix, iy);
        mass += m;
        h += m * p;
        J += m * (p.squaredNorm() * Mat3::Identity() - p * p.transpose());
      }
    CHECK(hammer.truth.mass == doctest::Approx(mass).epsilon(1e-14));
    CHECK((hammer.truth.first_moment - h).norm() < 1e-14);
    CHECK((hammer.truth.inertia_matrix() - J).norm() < 1e-14);
  }

  SUBCASE("all configurations are physically consistent and hull-contained") {
    for (const TestObjectConfig config : all_test_objects()) {
      const TestObject obj = build_test_object(config);
      CHECK(is_physically_consistent(obj.truth));
      CHECK(obj.truth.mass > 0.0);
      for (const auto& prim : obj.shape.primitives)
        if (!prim.has_volume()) CHECK(obj.shape.contains(prim.translation));
      const SampleResult sample = sample_points(obj.shape, 0.04);
      for (Eigen::Index i = 0; i < sample.positions.rows(); ++i)
        CHECK(obj.shape.contains(sample.positions.row(i).transpose()));
    }
  }

  SUBCASE("name round trip") {
    for (const TestObjectConfig config : all_test_objects())
      CHECK(test_object_from_string(to_string(config)) == config);
    CHECK_THROWS_AS(test_object_from_string("bogus"), std::invalid_argument);
  }
}

TEST_CASE("inertia error of the sampled box is non-increasing in density") {
  const Vec3 dims(0.2, 0.1, 0.05);
  const ShapeSpec box = solid_box(dims, 1000.0);
  const InertialParams truth = box.analytic_params();

  std::vector<double> errors;
  for (const double density : {0.01, 0.04, 0.09, 0.25}) {
    const SampleResult sample = sample_points(box, density);
    PointMassModel model;
    model.positions = sample.positions;
    model.masses = Eigen::VectorXd::Constant(sample.positions.rows(),
                                             truth.mass / static_cast<double>(sample.positions.rows()));
    const InertialParams agg = aggregate(model);

    const double sq = dims.squaredNorm();
    double err = 0.0;
    constexpr int ii[6] = {0, 0, 0, 1, 1, 2};
    constexpr int jj[6] = {0, 1, 2, 1, 2, 2};
    for (int e = 0; e < 6; ++e) {
      const double den = std::abs(truth.mass / 12.0 *
                                  ((ii[e] == jj[e] ? sq : 0.0) - dims(ii[e]) * dims(jj[e])));
      err += std::abs(agg.inertia(e) - truth.inertia(e)) / den * 100.0;
    }
    errors.push_back(err / 6.0);
  }
  for (std::size_t i = 1; i < errors.size(); ++i)
    CHECK(errors[i] <= errors[i - 1] + 2.0);  // two-point tolerance band
}
