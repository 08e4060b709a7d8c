#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace rbflow {

enum class FamilyKind { EinsteinSphere, ConformalTorus2D, ConformalSphere2D, SU2Homogeneous };

std::string to_string(FamilyKind kind);
bool is_conformal(FamilyKind kind);

// Initial conformal factor presets. Only meaningful for conformal families.
enum class Preset { Zero, Constant, CosX, CosXY, RandomBand };

std::string to_string(Preset preset);

struct InitialData {
  Preset preset = Preset::Zero;
  // Constant: the value k. Other presets: the amplitude A.
  double amplitude = 0.0;
  double s0 = 1.0;                         // EinsteinSphere scale
  std::array<double, 3> triple{1.0, 1.0, 1.0};  // SU2Homogeneous (a, b, c)

  bool operator==(const InitialData&) const = default;
};

struct FamilySpec {
  FamilyKind kind = FamilyKind::EinsteinSphere;
  int n = 3;
  // Grid points per side (torus) or subdivision level (icosphere).
  int resolution = 0;
  InitialData initial;
  std::uint64_t seed = 0;

  bool operator==(const FamilySpec&) const = default;
};

// Throws ConfigError listing every violated invariant.
void validate(const FamilySpec& spec);

struct Edge {
  int i;
  int j;
  double weight;
};

// Discretization substrate of a conformal family. The stiffness matrix is
// assembled from `edges` as sum w_e (e_i - e_j)(e_i - e_j)^T, so it is
// symmetric with zero row sums by construction.
struct BaseGeometry {
  FamilyKind kind;
  Eigen::MatrixX3d positions;
  std::vector<Edge> edges;
  Eigen::SparseMatrix<double> stiffness;
  Eigen::VectorXd mass;
  Eigen::VectorXd R0;
  std::vector<std::array<int, 3>> triangles;  // icosphere only
  int grid_n = 0;                             // torus only
  // Torus: grid spacing. Icosphere: sqrt(8 / Gershgorin bound of M^{-1} S),
  // i.e. the spacing of a 5-point grid with the same spectral radius.
  double spacing = 0.0;

  [[nodiscard]] int size() const { return static_cast<int>(mass.size()); }
  [[nodiscard]] double base_volume() const { return mass.sum(); }

  // sum_e w_e (f_i - f_j)(h_i - h_j). Bitwise symmetric in (f, h).
  [[nodiscard]] double dirichlet_form(const Eigen::VectorXd& f, const Eigen::VectorXd& h) const;
  // sum_e w_e * (q_i + q_j)/2 * (f_i - f_j)^2, the discrete integral of q |grad f|^2.
  [[nodiscard]] double weighted_dirichlet_energy(const Eigen::VectorXd& q,
                                                 const Eigen::VectorXd& f) const;
  // Torus node index with periodic wrap.
  [[nodiscard]] int grid_index(int ix, int iy) const;
};

std::shared_ptr<const BaseGeometry> make_torus_grid(int n);
std::shared_ptr<const BaseGeometry> make_icosphere(int subdivisions);

struct EinsteinScale {
  double s;
};
struct ConformalFactor {
  Eigen::VectorXd u;
};
struct Su2Triple {
  double a;
  double b;
  double c;
};

using MetricDof = std::variant<EinsteinScale, ConformalFactor, Su2Triple>;

struct MetricState {
  FamilySpec family;
  std::shared_ptr<const BaseGeometry> geometry;  // null for closed-form families
  MetricDof dof;
  double t = 0.0;

  [[nodiscard]] const BaseGeometry& base() const;
  [[nodiscard]] bool discretized() const { return geometry != nullptr; }
  [[nodiscard]] int dimension() const { return family.n; }
};

MetricState init_state(const FamilySpec& spec);
// Same family and geometry, new degrees of freedom.
MetricState with_dof(const MetricState& state, MetricDof dof, double t);
// Throws ConfigError on nonpositive metric coefficients or a dof/family mismatch.
void validate(const MetricState& state);

// Volume of the unit round sphere S^n.
double unit_sphere_volume(int n);

double volume(const MetricState& state);

// Per-point volume weights of (M, g). Closed-form families return a single
// weight equal to the total volume; fields on them are constants of size 1.
Eigen::VectorXd volume_weights(const MetricState& state);

// Number of field values a state expects (1 for closed-form families).
int field_size(const MetricState& state);

double integrate_scalar(const MetricState& state, const Eigen::VectorXd& field);

}  // namespace rbflow
