#include "acmech/lamb.hpp"

#include <cmath>
#include <ostream>

#include "acmech/format.hpp"

namespace acmech::lamb {

namespace {

void check_material(const ElasticMaterial& m) {
  if (!(m.c_l > 0.0) || !(m.c_t > 0.0) || !(m.rho > 0.0))
    throw std::invalid_argument("material speeds and density must be positive");
  if (!(m.c_l > m.c_t * std::sqrt(4.0 / 3.0)))
    throw std::invalid_argument("c_l must exceed c_t * sqrt(4/3) (positive bulk modulus)");
}

// l = 2 traction determinant in the dimensionless variables xi = omega R/c_l,
// eta = omega R/c_t; shared 2x2 structure for the radial/transverse stress rows
double det_l2(double xi, double eta) {
  constexpr int l = 2;
  const double jl_xi = std::sph_bessel(l, xi);
  const double jl1_xi = std::sph_bessel(l + 1, xi);
  const double jl_eta = std::sph_bessel(l, eta);
  const double jl1_eta = std::sph_bessel(l + 1, eta);
  const double m11 = (l * l - l - eta * eta / 2) * jl_xi + 2 * xi * jl1_xi;
  const double m12 = l * (l + 1) * ((l - 1) * jl_eta - eta * jl1_eta);
  const double m21 = (l - 1) * jl_xi - xi * jl1_xi;
  const double m22 = (l * l - 1 - eta * eta / 2) * jl_eta + eta * jl1_eta;
  return m11 * m22 - m12 * m21;
}

}  // namespace

double spheroidal_determinant(const ElasticMaterial& material, double radius, double omega) {
  check_material(material);
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
  return det_l2(omega * radius / material.c_l, omega * radius / material.c_t);
}

std::vector<AcousticMode> find_modes(const ElasticMaterial& material, double radius, int n_max) {
  check_material(material);
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  if (n_max < 1 || n_max > 50) throw std::invalid_argument("n_max must be in [1, 50]");

  const double ratio = material.c_l / material.c_t;
  auto f = [&](double eta) { return det_l2(eta / ratio, eta); };

  // scan in eta = omega R/c_t; step 1/50 beats the c_t/(40 R) grid contract
  const double step = 0.02;
  const double eta_max = 250.0;
  std::vector<AcousticMode> out;
  double eta = step;
  double prev = f(eta);
  while (eta < eta_max && static_cast<int>(out.size()) < n_max) {
    const double next_eta = eta + step;
    const double cur = f(next_eta);
    if ((prev < 0) != (cur < 0)) {
      double lo = eta, hi = next_eta;
      for (int it = 0; it < 80 && (hi - lo) > 1e-13 * hi; ++it) {
        const double mid = (lo + hi) / 2;
        if ((f(mid) < 0) == (prev < 0))
          lo = mid;
        else
          hi = mid;
      }
      const double root = (lo + hi) / 2;
      AcousticMode mode;
      mode.n = static_cast<int>(out.size()) + 1;
      mode.dimensionless_root = root;
      mode.omega_p = root * material.c_t / radius;
      out.push_back(mode);
    }
    prev = cur;
    eta = next_eta;
  }
  if (static_cast<int>(out.size()) < n_max)
    throw RootCountError("found " + std::to_string(out.size()) + " of " + std::to_string(n_max) +
                             " roots scanning eta = omega R/c_t up to " + std::to_string(eta_max) +
                             " at step " + std::to_string(step),
                         static_cast<int>(out.size()), n_max);
  return out;
}

void write_mode_table(std::ostream& os, const std::vector<AcousticMode>& modes) {
  os << "n,l,m,omega_p_rad_s,dimensionless_root\n";
  for (const auto& mode : modes) {
    os << mode.n << ',' << mode.l << ',' << mode.m << ',' << format_g9(mode.omega_p) << ','
       << format_g9(mode.dimensionless_root) << '\n';
  }
}

}  // namespace acmech::lamb
