#pragma once

#include <iosfwd>
#include <stdexcept>
#include <vector>

// Spheroidal vibration frequencies of a free homogeneous elastic sphere,
// restricted to the quadrupolar (l = 2) family the uniform magnon couples to.
// Zeros of the free-surface traction determinant give the eigenfrequencies;
// they depend on radius only through the combination omega R / c_t.

namespace acmech::lamb {

struct ElasticMaterial {
  double c_l = 0.0;  // longitudinal speed, m/s
  double c_t = 0.0;  // transverse speed, m/s
  double rho = 0.0;  // kg/m^3
};

struct AcousticMode {
  int n = 0;  // radial index, 1-based
  int l = 2;
  int m = 1;  // degenerate label, does not affect the frequency
  double omega_p = 0.0;            // rad/s
  double dimensionless_root = 0.0;  // omega_p R / c_t
};

struct RootCountError : std::runtime_error {
  RootCountError(const std::string& what_, int found_, int requested_)
      : std::runtime_error(what_), found(found_), requested(requested_) {}
  int found;
  int requested;
};

// Boundary determinant; continuous in omega, zero exactly at eigenfrequencies.
double spheroidal_determinant(const ElasticMaterial& material, double radius, double omega);

// First n_max (<= 50) roots, ascending.  The scan grid is finer than
// c_t/(40 R), and every root is bracketed by a sign change before bisection.
std::vector<AcousticMode> find_modes(const ElasticMaterial& material, double radius, int n_max);

// CSV with columns n,l,m,omega_p_rad_s,dimensionless_root.
void write_mode_table(std::ostream& os, const std::vector<AcousticMode>& modes);

}  // namespace acmech::lamb
