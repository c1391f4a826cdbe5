#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "hyperkge/errors.hpp"

namespace hyperkge {

// Guard below which a per-dimension norm counts as degenerate. Nothing in
// the model divides by a zero norm on purpose; this makes silent blow-up
// impossible.
inline constexpr double kNormalizeEps = 1e-12;

// A vector of quaternions: four parallel real coordinate vectors of shared
// length k. Component i of (a, b, c, d) holds the coefficients of
// 1, i, j, k for dimension i.
struct QuaternionVector {
  std::vector<double> a, b, c, d;

  QuaternionVector() = default;
  QuaternionVector(std::vector<double> a, std::vector<double> b,
                   std::vector<double> c, std::vector<double> d);

  static QuaternionVector zeros(std::size_t k);
  // Single-dimension convenience, mostly for tests and bindings.
  static QuaternionVector scalar(double a, double b, double c, double d);

  std::size_t dim() const { return a.size(); }
};

// A vector of octonions: eight parallel real coordinate vectors. x[0] is the
// scalar part, x[1..7] the coefficients of e1..e7.
struct OctonionVector {
  std::array<std::vector<double>, 8> x;

  OctonionVector() = default;
  explicit OctonionVector(std::array<std::vector<double>, 8> components);

  static OctonionVector zeros(std::size_t k);
  static OctonionVector scalar(const std::array<double, 8>& coeffs);

  std::size_t dim() const { return x[0].size(); }
};

// Dimension-wise Hamilton product q1 ⊗ q2. Non-commutative, associative,
// norm-multiplicative.
QuaternionVector hamilton_product(const QuaternionVector& q1,
                                  const QuaternionVector& q2);

QuaternionVector conjugate(const QuaternionVector& q);

// Per-dimension norm sqrt(a^2 + b^2 + c^2 + d^2).
std::vector<double> norm(const QuaternionVector& q);

// Per-dimension division by the norm. Throws DegenerateError if any
// dimension has norm <= eps.
QuaternionVector normalize(const QuaternionVector& q,
                           double eps = kNormalizeEps);

// Sum over dimensions of the four coordinate-wise inner products.
double inner(const QuaternionVector& q1, const QuaternionVector& q2);

// Dimension-wise Cayley product o1 ⊗ o2. Non-commutative, non-associative,
// norm-multiplicative.
OctonionVector octonion_product(const OctonionVector& o1,
                                const OctonionVector& o2);

OctonionVector conjugate(const OctonionVector& o);
std::vector<double> norm(const OctonionVector& o);
OctonionVector normalize(const OctonionVector& o, double eps = kNormalizeEps);
double inner(const OctonionVector& o1, const OctonionVector& o2);

// Low-level kernels shared by the typed operations above and by the scoring
// and training pipeline. A hypercomplex row is a component-major buffer of
// `components * k` doubles: component c occupies [c*k, (c+1)*k).
namespace algebra {

// Basis multiplication structure: e_i * e_j = sign[i][j] * e_{index[i][j]}.
struct MulTable {
  int components;
  std::array<std::array<std::int8_t, 8>, 8> sign;
  std::array<std::array<std::uint8_t, 8>, 8> index;
};

const MulTable& quaternion_table();
const MulTable& octonion_table();
const MulTable& table_for(int components);

// out = x ⊗ y, dimension-wise. Buffers must not alias.
void product(const MulTable& table, const double* x, const double* y,
             double* out, std::size_t k);

// Given upstream = d(phi)/d(x ⊗ y), accumulates d(phi)/dx into gx and
// d(phi)/dy into gy. Either of gx, gy may be null to skip that side.
void product_backward(const MulTable& table, const double* x, const double* y,
                      const double* upstream, double* gx, double* gy,
                      std::size_t k);

void conjugate_into(int components, const double* x, double* out,
                    std::size_t k);

// Per-dimension modulus sqrt(sum of squared components).
void norms_into(int components, const double* x, double* out, std::size_t k);

inline constexpr std::size_t kNoDegenerateDim = static_cast<std::size_t>(-1);

// out = x / |x| per dimension; also records the per-dimension norms.
// Returns the first dimension whose norm is <= eps (leaving out unspecified
// there), or kNoDegenerateDim if none.
std::size_t normalize_into(int components, const double* x, double* out,
                           double* norms_out, std::size_t k, double eps);

// Given upstream = d(phi)/d(normalized x), accumulates d(phi)/dx into gx.
// `normalized` and `norms` are the forward outputs.
void normalize_backward(int components, const double* normalized,
                        const double* norms, const double* upstream,
                        double* gx, std::size_t k);

double inner(int components, const double* x, const double* y, std::size_t k);

}  // namespace algebra

}  // namespace hyperkge
