#include "dislocation_fields.hpp"

namespace dislocgeo {

void DislocationSpec::validate() const {
  if (!(core_radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "dislocation: core radius must be positive");
  const double nn = norm(line_direction);
  if (std::abs(nn - 1.0) > 1e-12)
    throw Error(ErrorCode::InvalidArgument, "dislocation: line direction must be a unit vector");
  for (int d = 0; d < 3; ++d)
    if (!std::isfinite(burgers[d]) || !std::isfinite(center[d]))
      throw Error(ErrorCode::InvalidArgument, "dislocation: non-finite burgers vector or center");
}

DislocationSpec DislocationSpec::screw(double b, double R) {
  DislocationSpec s;
  s.burgers = {0.0, 0.0, b};
  s.core_radius = R;
  return s;
}

DislocationSpec DislocationSpec::edge(double b, double R) {
  DislocationSpec s;
  s.burgers = {b, 0.0, 0.0};
  s.core_radius = R;
  return s;
}

double radial_density(double r, double R) {
  if (!(R > 0.0)) throw Error(ErrorCode::InvalidArgument, "radial_density: R must be positive");
  if (r >= R) return 0.0;
  return 3.0 / (kPi * R * R) * (1.0 - r / R);
}

double line_distance(const DislocationSpec& spec, const Vec3& x) {
  const Vec3& n = spec.line_direction;
  Vec3 d{x[0] - spec.center[0], x[1] - spec.center[1], x[2] - spec.center[2]};
  const double s = dot(d, n);
  for (int k = 0; k < 3; ++k) d[k] -= s * n[k];
  return norm(d);
}

TwoForm torsion_coefficients(const DislocationSpec& spec, const Vec3& x) {
  TwoForm t{};
  const double f = radial_density(line_distance(spec, x), spec.core_radius);
  if (f == 0.0) return t;
  for (int i = 0; i < 3; ++i)
    for (int m = 0; m < 3; ++m) t[i][m] = f * spec.burgers[i] * spec.line_direction[m];
  return t;
}

TorsionField::TorsionField(DislocationSpec spec) : specs_{spec} { spec.validate(); }

TorsionField::TorsionField(std::vector<DislocationSpec> specs) : specs_(std::move(specs)) {
  for (const auto& s : specs_) s.validate();
}

TwoForm TorsionField::at(const Vec3& x) const {
  TwoForm t{};
  for (const auto& s : specs_) {
    const TwoForm a = torsion_coefficients(s, x);
    for (int i = 0; i < 3; ++i)
      for (int m = 0; m < 3; ++m) t[i][m] += a[i][m];
  }
  return t;
}

bool TorsionField::is_zero() const {
  for (const auto& s : specs_)
    if (norm(s.burgers) != 0.0) return false;
  return true;
}

TwoForm hodge_star_1form(const OneForm& w) { return w; }
OneForm hodge_star_2form(const TwoForm& w) { return w; }

VectorForm VectorForm::zero_form(const Vec3& v) {
  VectorForm f;
  f.degree = 0;
  f.coeffs[0] = v;
  return f;
}

double form_inner_product(const VectorForm& w, const VectorForm& h) {
  if (w.degree != h.degree)
    throw Error(ErrorCode::InvalidArgument, "form_inner_product: degree mismatch");
  if (w.degree == 0) return dot(w.coeffs[0], h.coeffs[0]);
  if (w.degree != 1 && w.degree != 2)
    throw Error(ErrorCode::InvalidArgument, "form_inner_product: degree must be 0, 1 or 2");
  // Both orthonormal 1-form and dual 2-form bases: plain coefficient sum.
  double s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) s += w.coeffs[i][k] * h.coeffs[i][k];
  return s;
}

}  // namespace dislocgeo
