#include "rbflow/families.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Geometry>

#include "rbflow/error.hpp"

namespace rbflow {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::SparseMatrix<double> assemble_stiffness(int size, const std::vector<Edge>& edges) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(edges.size() * 4);
  for (const auto& e : edges) {
    triplets.emplace_back(e.i, e.i, e.weight);
    triplets.emplace_back(e.j, e.j, e.weight);
    triplets.emplace_back(e.i, e.j, -e.weight);
    triplets.emplace_back(e.j, e.i, -e.weight);
  }
  Eigen::SparseMatrix<double> S(size, size);
  S.setFromTriplets(triplets.begin(), triplets.end());
  S.makeCompressed();
  return S;
}

double interior_angle(const Eigen::Vector3d& at, const Eigen::Vector3d& p, const Eigen::Vector3d& q) {
  const Eigen::Vector3d a = p - at;
  const Eigen::Vector3d b = q - at;
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

double cotangent(const Eigen::Vector3d& at, const Eigen::Vector3d& p, const Eigen::Vector3d& q) {
  const Eigen::Vector3d a = p - at;
  const Eigen::Vector3d b = q - at;
  return a.dot(b) / a.cross(b).norm();
}

// Band-limited random field on the torus: Fourier modes with |k|_inf <= 3.
Eigen::VectorXd torus_random_band(const BaseGeometry& geo, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(geo.size());
  for (int kx = -3; kx <= 3; ++kx) {
    for (int ky = 0; ky <= 3; ++ky) {
      if (ky == 0 && kx <= 0) continue;
      const double ca = coef(rng);
      const double sa = coef(rng);
      for (int v = 0; v < geo.size(); ++v) {
        const double phase = 2.0 * kPi * (kx * geo.positions(v, 0) + ky * geo.positions(v, 1));
        u[v] += ca * std::cos(phase) + sa * std::sin(phase);
      }
    }
  }
  return u;
}

// Band-limited random field on the sphere: polynomials of degree 1..3 in the
// embedding coordinates.
Eigen::VectorXd sphere_random_band(const BaseGeometry& geo, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(geo.size());
  for (int px = 0; px <= 3; ++px) {
    for (int py = 0; py + px <= 3; ++py) {
      for (int pz = 0; pz + py + px <= 3; ++pz) {
        if (px + py + pz == 0) continue;
        const double a = coef(rng);
        for (int v = 0; v < geo.size(); ++v) {
          u[v] += a * std::pow(geo.positions(v, 0), px) * std::pow(geo.positions(v, 1), py) *
                  std::pow(geo.positions(v, 2), pz);
        }
      }
    }
  }
  u.array() -= u.mean();
  return u;
}

Eigen::VectorXd preset_field(const FamilySpec& spec, const BaseGeometry& geo) {
  const int size = geo.size();
  const double A = spec.initial.amplitude;
  const bool torus = spec.kind == FamilyKind::ConformalTorus2D;
  Eigen::VectorXd u(size);
  switch (spec.initial.preset) {
    case Preset::Zero:
      u.setZero();
      break;
    case Preset::Constant:
      u.setConstant(A);
      break;
    case Preset::CosX:
      for (int v = 0; v < size; ++v) {
        u[v] = torus ? A * std::cos(2.0 * kPi * geo.positions(v, 0)) : A * geo.positions(v, 0);
      }
      break;
    case Preset::CosXY:
      for (int v = 0; v < size; ++v) {
        u[v] = torus ? A * std::cos(2.0 * kPi * geo.positions(v, 0)) *
                           std::cos(2.0 * kPi * geo.positions(v, 1))
                     : A * geo.positions(v, 0) * geo.positions(v, 1);
      }
      break;
    case Preset::RandomBand: {
      u = torus ? torus_random_band(geo, spec.seed) : sphere_random_band(geo, spec.seed);
      const double peak = u.cwiseAbs().maxCoeff();
      u *= peak > 0.0 ? A / peak : 0.0;
      break;
    }
  }
  return u;
}

}  // namespace

std::string to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::EinsteinSphere:
      return "einstein_sphere";
    case FamilyKind::ConformalTorus2D:
      return "conformal_torus";
    case FamilyKind::ConformalSphere2D:
      return "conformal_sphere";
    case FamilyKind::SU2Homogeneous:
      return "su2";
  }
  return "unknown";
}

std::string to_string(Preset preset) {
  switch (preset) {
    case Preset::Zero:
      return "zero";
    case Preset::Constant:
      return "constant";
    case Preset::CosX:
      return "cos_x";
    case Preset::CosXY:
      return "cos_xy";
    case Preset::RandomBand:
      return "random_band";
  }
  return "unknown";
}

bool is_conformal(FamilyKind kind) {
  return kind == FamilyKind::ConformalTorus2D || kind == FamilyKind::ConformalSphere2D;
}

void validate(const FamilySpec& spec) {
  std::vector<std::string> problems;
  switch (spec.kind) {
    case FamilyKind::EinsteinSphere:
      if (spec.n < 2) problems.push_back("einstein_sphere requires n >= 2");
      if (!(spec.initial.s0 > 0.0)) problems.push_back("einstein_sphere requires s0 > 0");
      break;
    case FamilyKind::SU2Homogeneous:
      if (spec.n != 3) problems.push_back("su2 requires n = 3");
      for (double x : spec.initial.triple) {
        if (!(x > 0.0)) {
          problems.push_back("su2 requires a, b, c > 0");
          break;
        }
      }
      break;
    case FamilyKind::ConformalTorus2D:
      if (spec.n != 2) problems.push_back("conformal families require n = 2");
      if (spec.resolution < 8) problems.push_back("torus grid resolution must be >= 8");
      break;
    case FamilyKind::ConformalSphere2D:
      if (spec.n != 2) problems.push_back("conformal families require n = 2");
      if (spec.resolution < 2) problems.push_back("icosphere subdivision must be >= 2");
      if (spec.resolution > 8) problems.push_back("icosphere subdivision must be <= 8");
      break;
  }
  if (problems.empty()) return;
  std::ostringstream msg;
  for (std::size_t k = 0; k < problems.size(); ++k) msg << (k ? "; " : "") << problems[k];
  throw ConfigError(msg.str());
}

double BaseGeometry::dirichlet_form(const Eigen::VectorXd& f, const Eigen::VectorXd& h) const {
  if (f.size() != size() || h.size() != size()) throw DimensionMismatch("dirichlet_form: size mismatch");
  double acc = 0.0;
  for (const auto& e : edges) acc += e.weight * ((f[e.i] - f[e.j]) * (h[e.i] - h[e.j]));
  return acc;
}

double BaseGeometry::weighted_dirichlet_energy(const Eigen::VectorXd& q, const Eigen::VectorXd& f) const {
  if (f.size() != size() || q.size() != size()) {
    throw DimensionMismatch("weighted_dirichlet_energy: size mismatch");
  }
  double acc = 0.0;
  for (const auto& e : edges) {
    const double d = f[e.i] - f[e.j];
    acc += e.weight * 0.5 * (q[e.i] + q[e.j]) * d * d;
  }
  return acc;
}

int BaseGeometry::grid_index(int ix, int iy) const {
  const int n = grid_n;
  ix = ((ix % n) + n) % n;
  iy = ((iy % n) + n) % n;
  return iy * n + ix;
}

std::shared_ptr<const BaseGeometry> make_torus_grid(int n) {
  if (n < 8) throw ConfigError("torus grid resolution must be >= 8");
  auto geo = std::make_shared<BaseGeometry>();
  geo->kind = FamilyKind::ConformalTorus2D;
  geo->grid_n = n;
  geo->spacing = 1.0 / n;
  const int size = n * n;
  geo->positions.resize(size, 3);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      geo->positions.row(geo->grid_index(ix, iy)) << ix * geo->spacing, iy * geo->spacing, 0.0;
    }
  }
  // 5-point stiffness: the Dirichlet energy of a grid function is
  // sum over grid edges of (f_i - f_j)^2, independent of h.
  geo->edges.reserve(2 * size);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const int v = geo->grid_index(ix, iy);
      geo->edges.push_back({v, geo->grid_index(ix + 1, iy), 1.0});
      geo->edges.push_back({v, geo->grid_index(ix, iy + 1), 1.0});
    }
  }
  geo->stiffness = assemble_stiffness(size, geo->edges);
  geo->mass = Eigen::VectorXd::Constant(size, geo->spacing * geo->spacing);
  geo->R0 = Eigen::VectorXd::Zero(size);
  return geo;
}

std::shared_ptr<const BaseGeometry> make_icosphere(int subdivisions) {
  if (subdivisions < 0) throw ConfigError("icosphere subdivision must be >= 0");
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> verts = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0}, {0, -1, phi}, {0, 1, phi},
      {0, -1, -phi}, {0, 1, -phi}, {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
      verts.push_back((verts[a] + verts[b]).normalized());
      const int id = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> refined;
    refined.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int ab = mid(f[0], f[1]);
      const int bc = mid(f[1], f[2]);
      const int ca = mid(f[2], f[0]);
      refined.push_back({f[0], ab, ca});
      refined.push_back({f[1], bc, ab});
      refined.push_back({f[2], ca, bc});
      refined.push_back({ab, bc, ca});
    }
    faces = std::move(refined);
  }

  auto geo = std::make_shared<BaseGeometry>();
  geo->kind = FamilyKind::ConformalSphere2D;
  const int size = static_cast<int>(verts.size());
  geo->positions.resize(size, 3);
  for (int v = 0; v < size; ++v) geo->positions.row(v) = verts[v].transpose();
  geo->triangles = faces;

  geo->mass = Eigen::VectorXd::Zero(size);
  Eigen::VectorXd angle_sum = Eigen::VectorXd::Zero(size);
  std::map<std::pair<int, int>, double> cot_weight;
  for (const auto& f : faces) {
    for (int k = 0; k < 3; ++k) {
      const int a = f[k];
      const int b = f[(k + 1) % 3];
      const int c = f[(k + 2) % 3];
      // The angle at c is opposite edge (a, b).
      cot_weight[std::minmax(a, b)] += 0.5 * cotangent(verts[c], verts[a], verts[b]);
      angle_sum[a] += interior_angle(verts[a], verts[b], verts[c]);
    }
    const double area = 0.5 * (verts[f[1]] - verts[f[0]]).cross(verts[f[2]] - verts[f[0]]).norm();
    for (int k = 0; k < 3; ++k) geo->mass[f[k]] += area / 3.0;
  }
  geo->edges.reserve(cot_weight.size());
  for (const auto& [key, w] : cot_weight) geo->edges.push_back({key.first, key.second, w});
  geo->stiffness = assemble_stiffness(size, geo->edges);

  geo->R0.resize(size);
  for (int v = 0; v < size; ++v) geo->R0[v] = 2.0 * (2.0 * kPi - angle_sum[v]) / geo->mass[v];

  double rate = 0.0;
  for (int v = 0; v < size; ++v) rate = std::max(rate, 2.0 * geo->stiffness.coeff(v, v) / geo->mass[v]);
  geo->spacing = std::sqrt(8.0 / rate);
  return geo;
}

const BaseGeometry& MetricState::base() const {
  if (!geometry) throw UnsupportedFamily(to_string(family.kind) + " carries no discretization");
  return *geometry;
}

MetricState init_state(const FamilySpec& spec) {
  validate(spec);
  MetricState state;
  state.family = spec;
  state.t = 0.0;
  switch (spec.kind) {
    case FamilyKind::EinsteinSphere:
      state.dof = EinsteinScale{spec.initial.s0};
      break;
    case FamilyKind::SU2Homogeneous:
      state.dof = Su2Triple{spec.initial.triple[0], spec.initial.triple[1], spec.initial.triple[2]};
      break;
    case FamilyKind::ConformalTorus2D:
    case FamilyKind::ConformalSphere2D: {
      state.geometry = spec.kind == FamilyKind::ConformalTorus2D ? make_torus_grid(spec.resolution)
                                                                 : make_icosphere(spec.resolution);
      state.dof = ConformalFactor{preset_field(spec, *state.geometry)};
      break;
    }
  }
  return state;
}

MetricState with_dof(const MetricState& state, MetricDof dof, double t) {
  MetricState next{state.family, state.geometry, std::move(dof), t};
  return next;
}

void validate(const MetricState& state) {
  const auto kind = state.family.kind;
  if (const auto* e = std::get_if<EinsteinScale>(&state.dof)) {
    if (kind != FamilyKind::EinsteinSphere) throw ConfigError("dof does not match family");
    if (!(e->s > 0.0) || !std::isfinite(e->s)) throw ConfigError("nonpositive Einstein scale");
  } else if (const auto* m = std::get_if<Su2Triple>(&state.dof)) {
    if (kind != FamilyKind::SU2Homogeneous) throw ConfigError("dof does not match family");
    if (!(m->a > 0.0 && m->b > 0.0 && m->c > 0.0) || !std::isfinite(m->a * m->b * m->c)) {
      throw ConfigError("nonpositive SU(2) metric coefficient");
    }
  } else {
    const auto& u = std::get<ConformalFactor>(state.dof).u;
    if (!is_conformal(kind)) throw ConfigError("dof does not match family");
    if (!state.geometry || u.size() != state.geometry->size()) {
      throw ConfigError("conformal factor does not match discretization");
    }
    if (!u.allFinite()) throw ConfigError("non-finite conformal factor");
  }
}

double unit_sphere_volume(int n) {
  return 2.0 * std::pow(kPi, 0.5 * (n + 1)) / std::tgamma(0.5 * (n + 1));
}

double volume(const MetricState& state) {
  validate(state);
  return std::visit(
      [&](const auto& dof) -> double {
        using T = std::decay_t<decltype(dof)>;
        if constexpr (std::is_same_v<T, EinsteinScale>) {
          return unit_sphere_volume(state.family.n) * std::pow(dof.s, 0.5 * state.family.n);
        } else if constexpr (std::is_same_v<T, Su2Triple>) {
          return unit_sphere_volume(3) * std::sqrt(dof.a * dof.b * dof.c);
        } else {
          return state.geometry->mass.dot((2.0 * dof.u).array().exp().matrix());
        }
      },
      state.dof);
}

Eigen::VectorXd volume_weights(const MetricState& state) {
  if (const auto* cf = std::get_if<ConformalFactor>(&state.dof)) {
    validate(state);
    return state.geometry->mass.cwiseProduct((2.0 * cf->u).array().exp().matrix());
  }
  return Eigen::VectorXd::Constant(1, volume(state));
}

int field_size(const MetricState& state) {
  return state.geometry ? state.geometry->size() : 1;
}

double integrate_scalar(const MetricState& state, const Eigen::VectorXd& field) {
  if (field.size() != field_size(state)) {
    throw DimensionMismatch("integrate_scalar: field has " + std::to_string(field.size()) +
                            " values, expected " + std::to_string(field_size(state)));
  }
  return volume_weights(state).dot(field);
}

}  // namespace rbflow
