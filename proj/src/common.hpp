#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace dislocgeo {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

enum class ErrorCode {
  InvalidArgument = 1,
  Validation,
  Domain,
  NonConvergence,
  SingularGeometry,
  DegeneratePlasticity,
  InvertedElement,
  Indefinite,
  InvalidMatrix,
  UnsupportedGeometry,
  InvalidLoop,
  Singularity,
  Io,
  Internal,
};

const char* error_code_name(ErrorCode code);

/// Every failure inside the library is reported through this type; the C API
/// converts it to a status code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline constexpr double kPi = 3.14159265358979323846;

inline Mat3 identity3() {
  return {{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
}

inline double det3(const Mat3& a) {
  return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
         a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
         a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

/// Inverse of a 3x3 matrix given its (nonzero) determinant.
inline Mat3 inverse3(const Mat3& a, double det) {
  Mat3 r;
  const double s = 1.0 / det;
  r[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) * s;
  r[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * s;
  r[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * s;
  r[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) * s;
  r[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * s;
  r[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * s;
  r[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) * s;
  r[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * s;
  r[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * s;
  return r;
}

inline Mat3 matmul(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 3; ++j) r[i][j] += a[i][k] * b[k][j];
  return r;
}

inline Mat3 transpose(const Mat3& a) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = a[j][i];
  return r;
}

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Levi-Civita symbol on 0-based indices.
inline int levi_civita(int i, int j, int k) {
  return ((i - j) * (j - k) * (k - i)) / 2;
}

}  // namespace dislocgeo
