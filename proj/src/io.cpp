#include "ipid/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ipid::io {

namespace {

constexpr const char* kDatasetHeader = "# ipid dataset v1";

std::vector<double> parse_row(const std::string& line) {
  std::vector<double> out;
  const char* ptr = line.data();
  const char* end = line.data() + line.size();
  while (ptr < end) {
    double value = 0.0;
    const auto [next, ec] = std::from_chars(ptr, end, value);
    if (ec != std::errc()) throw std::runtime_error("bad number in csv row: " + line);
    out.push_back(value);
    ptr = next;
    if (ptr < end && *ptr == ',') ++ptr;
  }
  return out;
}

void write_vec3(std::string& row, const Vec3& v) {
  for (int i = 0; i < 3; ++i) {
    row += ',';
    row += format_double(v(i));
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_measurement_csv(const std::filesystem::path& path, const MeasurementSeries& series) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << kDatasetHeader << "\n";
  out << "t,r00,r01,r02,r10,r11,r12,r20,r21,r22,tx,ty,tz,"
         "vx,vy,vz,wx,wy,wz,ax,ay,az,alx,aly,alz,fx,fy,fz,taux,tauy,tauz\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const KinematicSample& s = series.states[k];
    const Wrench& w = series.wrenches[k];
    std::string row = format_double(s.t);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        row += ',';
        row += format_double(s.rotation(i, j));
      }
    write_vec3(row, s.translation);
    write_vec3(row, s.lin_vel);
    write_vec3(row, s.ang_vel);
    write_vec3(row, s.lin_acc);
    write_vec3(row, s.ang_acc);
    write_vec3(row, w.force);
    write_vec3(row, w.torque);
    out << row << "\n";
  }
}

MeasurementSeries read_measurement_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != kDatasetHeader)
    throw std::runtime_error("unrecognized dataset header in " + path.string());
  std::getline(in, line);  // column names

  MeasurementSeries series;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto row = parse_row(line);
    if (row.size() != 31) throw std::runtime_error("dataset row must have 31 columns");
    KinematicSample s;
    s.t = row[0];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s.rotation(i, j) = row[1 + 3 * static_cast<std::size_t>(i) + static_cast<std::size_t>(j)];
    auto vec = [&row](std::size_t base) { return Vec3(row[base], row[base + 1], row[base + 2]); };
    s.translation = vec(10);
    s.lin_vel = vec(13);
    s.ang_vel = vec(16);
    s.lin_acc = vec(19);
    s.ang_acc = vec(22);
    Wrench w;
    w.force = vec(25);
    w.torque = vec(28);
    series.states.push_back(s);
    series.wrenches.push_back(w);
  }
  return series;
}

void write_points_csv(const std::filesystem::path& path, const PointMassModel& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "x,y,z,mass\n";
  for (Eigen::Index i = 0; i < model.size(); ++i) {
    out << format_double(model.positions(i, 0)) << ',' << format_double(model.positions(i, 1))
        << ',' << format_double(model.positions(i, 2)) << ','
        << format_double(model.masses.size() > i ? model.masses(i) : 0.0) << "\n";
  }
}

namespace {

const char* kind_name(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::Box: return "box";
    case PrimitiveKind::Cylinder: return "cylinder";
    case PrimitiveKind::Sphere: return "sphere";
    case PrimitiveKind::PointMass: return "point_mass";
  }
  return "unknown";
}

PrimitiveKind kind_from_name(const std::string& name) {
  if (name == "box") return PrimitiveKind::Box;
  if (name == "cylinder") return PrimitiveKind::Cylinder;
  if (name == "sphere") return PrimitiveKind::Sphere;
  if (name == "point_mass") return PrimitiveKind::PointMass;
  throw std::runtime_error("unknown primitive kind: " + name);
}

nlohmann::json vec3_to_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

Vec3 vec3_from_json(const nlohmann::json& j) {
  return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

nlohmann::json mat3_to_json(const Mat3& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < 3; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2)});
  return rows;
}

Mat3 mat3_from_json(const nlohmann::json& j) {
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) m(i, k) = j.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(k)).get<double>();
  return m;
}

}  // namespace

nlohmann::json shape_to_json(const ShapeSpec& shape) {
  nlohmann::json j;
  j["name"] = shape.name;
  j["primitives"] = nlohmann::json::array();
  for (const auto& prim : shape.primitives) {
    nlohmann::json p;
    p["kind"] = kind_name(prim.kind);
    p["dimensions"] = vec3_to_json(prim.dimensions);
    p["rotation"] = mat3_to_json(prim.rotation);
    p["translation"] = vec3_to_json(prim.translation);
    if (prim.has_volume())
      p["density"] = prim.density;
    else
      p["mass"] = prim.point_mass;
    j["primitives"].push_back(p);
  }
  return j;
}

ShapeSpec shape_from_json(const nlohmann::json& j) {
  ShapeSpec shape;
  shape.name = j.value("name", "");
  for (const auto& p : j.at("primitives")) {
    Primitive prim;
    prim.kind = kind_from_name(p.at("kind").get<std::string>());
    prim.dimensions = vec3_from_json(p.at("dimensions"));
    if (p.contains("rotation")) prim.rotation = mat3_from_json(p.at("rotation"));
    if (p.contains("translation")) prim.translation = vec3_from_json(p.at("translation"));
    prim.density = p.value("density", 0.0);
    prim.point_mass = p.value("mass", 0.0);
    shape.primitives.push_back(prim);
  }
  return shape;
}

nlohmann::json params_to_json(const InertialParams& params) {
  nlohmann::json j;
  j["mass"] = params.mass;
  j["first_moment"] = vec3_to_json(params.first_moment);
  j["inertia"] = {params.inertia(0), params.inertia(1), params.inertia(2),
                  params.inertia(3), params.inertia(4), params.inertia(5)};
  j["frame"] = params.frame;
  return j;
}

InertialParams params_from_json(const nlohmann::json& j) {
  InertialParams p;
  p.mass = j.at("mass").get<double>();
  p.first_moment = vec3_from_json(j.at("first_moment"));
  for (int i = 0; i < 6; ++i) p.inertia(i) = j.at("inertia").at(static_cast<std::size_t>(i)).get<double>();
  p.frame = j.value("frame", "body");
  return p;
}

nlohmann::json report_to_json(const EstimateReport& report) {
  nlohmann::json j;
  j["estimator"] = report.estimator;
  j["theta_hat"] = params_to_json(report.theta_hat);
  j["solver_iterations"] = report.solver_iterations;
  j["wall_time_s"] = report.wall_time_s;
  j["physically_consistent"] = report.physically_consistent;
  j["min_pseudo_eigenvalue"] = report.min_pseudo_eigenvalue;
  j["residual_reduced"] = report.residual_reduced;
  j["residual_full"] = report.residual_full;
  j["rank"] = report.rank;
  j["rank_deficient"] = report.rank_deficient;
  j["ambiguity"] = report.ambiguity;
  if (report.mass_vector.size() > 0) {
    nlohmann::json masses = nlohmann::json::array();
    for (Eigen::Index i = 0; i < report.mass_vector.size(); ++i)
      masses.push_back(report.mass_vector(i));
    j["mass_vector"] = masses;
  }
  return j;
}

nlohmann::json error_report_to_json(const ErrorReport& report) {
  nlohmann::json j;
  j["mass_err"] = report.mass_err;
  j["com_err"] = report.com_err;
  j["com_err_axes"] = vec3_to_json(report.com_err_axes);
  j["inertia_err"] = report.inertia_err;
  nlohmann::json entries = nlohmann::json::array();
  for (int i = 0; i < 6; ++i) entries.push_back(report.inertia_err_entries(i));
  j["inertia_err_entries"] = entries;
  return j;
}

void save_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
}

nlohmann::json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  nlohmann::json j;
  in >> j;
  return j;
}

}  // namespace ipid::io
