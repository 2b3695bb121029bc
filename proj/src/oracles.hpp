#pragma once

#include <functional>
#include <vector>

#include "dislocation_fields.hpp"

namespace dislocgeo {

struct VolterraParams {
  double mu = 1.0;
  double nu = 0.3;
  double b = 1.0;
  double core_radius = 1.0;

  void validate() const;
  /// mu b / (2 pi R)
  double ds_screw() const;
  /// mu b / (2 pi (1 - nu) R)
  double ds_edge() const;
};

struct ScrewStress {
  double s23 = 0.0;
  double s31 = 0.0;
};

struct EdgeStress {
  double s11 = 0.0;
  double s22 = 0.0;
  double s33 = 0.0;
  double s12 = 0.0;
};

/// Infinite-medium screw field of a line along x3 through the origin. The sign
/// matches the solved fields: S23 < 0 on the positive x1 axis for b > 0.
/// Throws Singularity at r = 0.
ScrewStress volterra_screw_stress(double x1, double x2, const VolterraParams& p);

/// Plane-strain edge field, Burgers vector along x1, line along x3, with the
/// same sign convention as the screw field. Throws Singularity at r = 0.
EdgeStress volterra_edge_stress(double x1, double x2, const VolterraParams& p);

/// Poincare homotopy of the torsion about x0:
/// Theta^i_k(x) = int_0^1 t (c^i(x0 + t d) x d)_k dt, d = x - x0, with c^i the
/// dual coefficients of T^i. The integral is split at the core boundaries and
/// refined until successive estimates differ by less than tol.
Mat3 homotopy_theta(const TorsionField& torsion, const Vec3& x, const Vec3& x0, double tol = 1e-10);

/// Central-difference gradient.
std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                const std::vector<double>& x, double step);

}  // namespace dislocgeo
