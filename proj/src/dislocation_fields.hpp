#pragma once

#include <vector>

#include "common.hpp"

namespace dislocgeo {

/// Straight dislocation line with a linear-taper core.
struct DislocationSpec {
  Vec3 burgers{0.0, 0.0, 1.0};
  Vec3 line_direction{0.0, 0.0, 1.0};
  double core_radius = 1.0;
  Vec3 center{0.0, 0.0, 0.0};

  void validate() const;

  static DislocationSpec screw(double b, double R = 1.0);
  static DislocationSpec edge(double b, double R = 1.0);
};

/// f(r) = 3/(pi R^2) (1 - r/R) inside the core, 0 outside. Integrates to one
/// over the core disk.
double radial_density(double r, double R);

/// Distance from x to the dislocation line.
double line_distance(const DislocationSpec& spec, const Vec3& x);

/// R^3-valued 1-form, a[i][k] = component along E_i of the dx^k coefficient.
using OneForm = Mat3;

/// R^3-valued 2-form in the dual basis (dx2^dx3, dx3^dx1, dx1^dx2):
/// T^i_jk = eps_mjk a[i][m].
using TwoForm = Mat3;

/// Coefficient T^i_jk (0-based indices) of a 2-form stored in the dual basis.
inline double two_form_component(const TwoForm& t, int i, int j, int k) {
  double s = 0.0;
  for (int m = 0; m < 3; ++m) s += levi_civita(m, j, k) * t[i][m];
  return s;
}

/// Torsion 2-form T^i_jk = f(r) b^i n^l eps_ljk of a single dislocation.
TwoForm torsion_coefficients(const DislocationSpec& spec, const Vec3& x);

/// Sum of the torsion of several dislocations.
class TorsionField {
 public:
  TorsionField() = default;
  explicit TorsionField(DislocationSpec spec);
  explicit TorsionField(std::vector<DislocationSpec> specs);

  TwoForm at(const Vec3& x) const;
  double component(const Vec3& x, int i, int j, int k) const {
    return two_form_component(at(x), i, j, k);
  }
  const std::vector<DislocationSpec>& specs() const { return specs_; }
  /// True when every Burgers vector vanishes.
  bool is_zero() const;

 private:
  std::vector<DislocationSpec> specs_;
};

/// Hodge star of a 1-form: dx1 -> dx2^dx3, dx2 -> dx3^dx1, dx3 -> dx1^dx2.
/// In the dual-basis storage this is the identity on coefficients.
TwoForm hodge_star_1form(const OneForm& w);
OneForm hodge_star_2form(const TwoForm& w);

/// R^3-valued k-form with k in {0, 1, 2}. Degree 0 uses row 0 only.
struct VectorForm {
  int degree = 1;
  Mat3 coeffs{};

  static VectorForm zero_form(const Vec3& v);
  static VectorForm one_form(const OneForm& a) { return {1, a}; }
  static VectorForm two_form(const TwoForm& a) { return {2, a}; }
};

/// Pointwise inner product <w, h> (coefficient of the volume form) with the
/// Euclidean metric on the values. Throws InvalidArgument on degree mismatch.
double form_inner_product(const VectorForm& w, const VectorForm& h);

}  // namespace dislocgeo
