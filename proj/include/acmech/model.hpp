#pragma once

#include <optional>
#include <string>
#include <vector>

#include "acmech/gaussian.hpp"

// Three-mode model of a levitated magnetic sphere: center-of-mass motion at
// omega_x, the uniform precession (Kittel) magnon at omega_m = gyro * B0, and
// one acoustic phonon at omega_p.  A static field gradient b_g converts the
// magnon's magnetostrictive dressing into a motion coupling; driving near the
// upper hybrid mode and keeping corotating terms leaves a static three-mode
// quadratic model whose mechanical steady state is the quantity of interest.

namespace acmech {

struct MagnetParams {
  double radius = 100e-9;                 // m
  double density = 5170.0;                // kg/m^3
  double saturation_magnetization = 5.87e5;  // A/m
  double gyro_ratio = 1.76e11;            // rad/(s T), magnitude
  double omega_p = 0.0;                   // acoustic mode frequency, rad/s
  double magnon_phonon_g = 0.0;           // rad/s at this radius
  std::optional<double> effective_mass;   // kg, overrides the sphere mass

  double volume() const;
  double mass() const;  // effective mass when set, else density * volume
  // same material at a different radius: omega_p ~ 1/R, g ~ 1/sqrt(R),
  // effective mass tracks volume
  MagnetParams at_radius(double new_radius) const;
};

// omega_p * R and g * sqrt(R) for the calibrated sphere, fitted to the
// operating-point fields at R = 10 nm, 100 nm and 1 um (relative-weighted
// least squares; all three reproduced to better than 0.5%).
inline constexpr double kOmegaPRadiusProduct = 1.016735333761826e4;  // rad m / s
inline constexpr double kGSqrtRadiusProduct = 7.001343364499233e4;   // rad sqrt(m) / s

// YIG sphere with the calibrated acoustic frequency and magnetoelastic g.
MagnetParams yig_sphere(double radius);

struct FieldDrive {
  double B0 = 0.0;       // static bias field, T
  double gradient = 0.0;  // field gradient b_g, T/m
  double omega_d = 0.0;   // drive frequency, rad/s
};

struct BathParams {
  double omega_x = 0.0;  // trap frequency, rad/s
  double Q_x = 1.0;      // mechanical quality factor
  double gamma_m = 0.0;  // magnon linewidth, rad/s
  double Q_p = 1.0;      // acoustic quality factor
  double T_x = 0.0;      // K
  double T_m = 0.0;
  double T_p = 0.0;

  double gamma_x() const { return omega_x / Q_x; }
  double gamma_p(double omega_p) const { return omega_p / Q_p; }
};

double kittel_frequency(const MagnetParams& magnet, double B0);
double zero_point_motion(const MagnetParams& magnet, double omega_x);  // m
double zero_point_magnetization(const MagnetParams& magnet);           // A/m
// G_x = b_g V M_K x_0 / (2 hbar); linear in b_g, independent of radius for
// the calibrated sphere (V M_K x_0 ~ R^{3/2} * R^{-3/2}).
double coupling_Gx(const MagnetParams& magnet, double gradient, double omega_x);
double thermal_occupation(double omega, double temperature);

// Hybridized magnon-phonon modes.  chi parametrizes the mixing: the magnon
// weight of mode 2 is chi/norm with norm = sqrt(1 + chi^2), and
// chi -> 0 turns mode 2 into the bare phonon.
struct BogoliubovModes {
  double chi = 0.0;
  double norm = 1.0;      // sqrt(1 + chi^2)
  double omega_1 = 0.0;   // lower hybrid frequency
  double omega_2 = 0.0;   // upper hybrid frequency
  double phonon_weight_2() const { return 1.0 / (norm * norm); }
  double magnon_weight_2() const { return chi * chi / (norm * norm); }
};

BogoliubovModes bogoliubov(double omega_m, double omega_p, double g);

// Hybrid-mode thermal rates inherited from the magnon and phonon baths.
struct NormalModeRates {
  double down_1 = 0.0, up_1 = 0.0;
  double down_2 = 0.0, up_2 = 0.0;
  double gamma_1() const { return down_1 - up_1; }
  double gamma_2() const { return down_2 - up_2; }
  double occupation_1() const { return up_1 / (down_1 - up_1); }
  double occupation_2() const { return up_2 / (down_2 - up_2); }
};

NormalModeRates normal_mode_rates(double gamma_m, double gamma_p, double n_m, double n_p,
                                  double chi);

double cooperativity(double G_x2, double gamma_2, double gamma_x);
double quantum_cooperativity(double coop, double n_x, double n_p);

// Field settings that hybridize at mixing chi and put the drive on the
// two-phonon resonance of the upper mode: omega_d = omega_2 - omega_x.
FieldDrive tune_fields(const MagnetParams& magnet, double chi_target, double omega_x,
                       double gradient);

// Rotating-frame model with modes ordered (motion, hybrid 1, hybrid 2).
struct RwaModel {
  gauss::QuadraticModel model;
  std::vector<gauss::LindbladChannel> channels;
  BogoliubovModes modes;
  NormalModeRates rates;
  double Delta_1 = 0.0, Delta_2 = 0.0;  // hybrid detunings from the drive
  double G_x1 = 0.0, G_x2 = 0.0;        // motion couplings to the hybrids
  double n_x = 0.0;                     // mechanical bath occupation
  double gamma_x = 0.0;                 // mechanical damping rate
  double cooperativity() const;
  double quantum_cooperativity() const;
};

RwaModel build_rwa_model(const MagnetParams& magnet, const FieldDrive& drive,
                         const BathParams& baths);

// Lab-frame model with modes ordered (motion, magnon, phonon) and the
// explicit cos(omega_d t) gradient drive; no rotating-wave step.
struct FullModel {
  gauss::QuadraticModel model;
  std::vector<gauss::LindbladChannel> channels;
};

FullModel build_full_model(const MagnetParams& magnet, const FieldDrive& drive,
                           const BathParams& baths);

// Checks the scale hierarchy the rotating-wave model relies on.  Each
// condition is a ratio that should exceed `margin`.
struct RegimeCondition {
  std::string name;
  double ratio = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct RegimeReport {
  std::vector<RegimeCondition> conditions;
  bool all_pass() const;
  std::string summary() const;
};

RegimeReport validate_regime(const MagnetParams& magnet, const FieldDrive& drive,
                             const BathParams& baths, double margin = 10.0);

}  // namespace acmech
