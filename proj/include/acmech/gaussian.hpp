#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

// Gaussian dynamics of quadratic open systems in the quadrature ordering
// r = (q_1, p_1, q_2, p_2, ...), with q = (a + a^dag)/sqrt(2) and [q, p] = i.
// A Hamiltonian H/hbar = 1/2 r^T W r plus thermal Lindblad channels gives
// linear moment equations
//   d<r>/dt  = A <r>,   dSigma/dt = A Sigma + Sigma A^T + D,
// with A = Omega W - 1/2 diag(kappa) and D diagonal in the channel rates.

namespace acmech::gauss {

struct NotHurwitz : std::runtime_error {
  explicit NotHurwitz(double margin_)
      : std::runtime_error("drift matrix is not Hurwitz (spectral abscissa " +
                           std::to_string(-margin_) + " >= 0)"),
        margin(margin_) {}
  double margin;  // -max Re(eig A); negative or zero here
};

struct StiffnessError : std::runtime_error {
  StiffnessError(const std::string& what_, double ratio_)
      : std::runtime_error(what_), ratio(ratio_) {}
  double ratio;  // fastest system rate over the resolvable step rate
};

// H(t)/hbar = 1/2 r^T (W0 + cos(omega_d t) W1) r.  W matrices are symmetric;
// construction symmetrizes and rejects anything asymmetric beyond roundoff.
class QuadraticModel {
 public:
  explicit QuadraticModel(Eigen::MatrixXd W0);
  QuadraticModel(Eigen::MatrixXd W0, Eigen::MatrixXd W1, double omega_d);

  int n_modes() const { return static_cast<int>(W0_.rows()) / 2; }
  int dim() const { return static_cast<int>(W0_.rows()); }
  bool driven() const { return driven_; }
  double omega_d() const { return omega_d_; }
  const Eigen::MatrixXd& W0() const { return W0_; }
  const Eigen::MatrixXd& W1() const { return W1_; }
  Eigen::MatrixXd W_at(double t) const;

 private:
  Eigen::MatrixXd W0_, W1_;
  double omega_d_ = 0.0;
  bool driven_ = false;
};

// One thermal channel acting on both quadratures of one mode.  down_rate is
// the emission rate gamma*(nbar+1), up_rate the absorption rate gamma*nbar;
// the mode thermalizes to nbar = up/(down - up) when down > up.
struct LindbladChannel {
  int mode = 0;
  double down_rate = 0.0;
  double up_rate = 0.0;
};

// First and second moments.  sigma is symmetric and obeys the uncertainty
// bound sigma + i Omega/2 >= 0; the checking constructor enforces both.
struct CovarianceState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd sigma;

  CovarianceState() = default;
  CovarianceState(Eigen::VectorXd mean_, Eigen::MatrixXd sigma_);

  int n_modes() const { return static_cast<int>(sigma.rows()) / 2; }
};

// Product thermal state with the given per-mode occupations, zero mean.
CovarianceState thermal_state(const std::vector<double>& occupations);

Eigen::MatrixXd symplectic_form(int n_modes);

// Most negative eigenvalue of sigma + i Omega/2; >= -tol for a physical state.
double physicality_deficit(const Eigen::MatrixXd& sigma);

struct DriftDiffusion {
  Eigen::MatrixXd A;
  Eigen::MatrixXd D;
};

DriftDiffusion build_drift_diffusion(const QuadraticModel& model,
                                     const std::vector<LindbladChannel>& channels,
                                     double t = 0.0);

// -max Re(eig A); positive iff A is Hurwitz.
double hurwitz_margin(const Eigen::MatrixXd& A);

// Steady state of A Sigma + Sigma A^T + D = 0.  Solves the vectorized system
// in extended precision so the returned double matrix satisfies
// ||A S + S A^T + D||_F <= 1e-10 ||D||_F even for stiff rate hierarchies.
// Throws NotHurwitz when no steady state exists.
Eigen::MatrixXd lyapunov_steady_state(const Eigen::MatrixXd& A, const Eigen::MatrixXd& D);
CovarianceState lyapunov_steady_state(const QuadraticModel& model,
                                      const std::vector<LindbladChannel>& channels);

// Per-mode occupations <a^dag a>, including any mean displacement.
std::vector<double> mode_occupations(const CovarianceState& state);

struct EvolveOptions {
  double rel_tol = 1e-8;       // local step error, relative to ||sigma||_F
  long max_steps = 20000000;   // across the whole time grid
};

// Propagate moments through the given times (strictly increasing; the first
// entry is where `initial` lives).  Static models advance in exact exponential
// steps; driven models use an exponential midpoint rule with step-doubling
// error control.  Each step maps sigma through a completely positive update,
// so physicality is preserved by construction.  Throws StiffnessError when
// the step controller cannot resolve the fastest timescale within max_steps.
std::vector<CovarianceState> evolve_covariance(const QuadraticModel& model,
                                               const std::vector<LindbladChannel>& channels,
                                               const CovarianceState& initial,
                                               const std::vector<double>& times,
                                               const EvolveOptions& opts = {});

enum class SpectrumKind {
  asymmetric,   // S(w) = (1/pi) Re v^T (-A + i w)^{-1} (Sigma + i Omega/2) v
  symmetrized,  // (S(w) + S(-w))/2
};

// Emission/absorption spectrum of the observable v^T r in the steady state,
// from the quantum regression theorem.  Integrates over all frequencies to
// v^T Sigma v (asymmetric and symmetrized alike).
class SpectrumEvaluator {
 public:
  SpectrumEvaluator(const Eigen::MatrixXd& A, const Eigen::MatrixXd& sigma_ss,
                    const Eigen::VectorXd& v, SpectrumKind kind = SpectrumKind::asymmetric);

  double operator()(double omega) const;
  double sum_rule_target() const { return sum_rule_; }  // v^T Sigma v
  // Adaptive quadrature over the whole real line, seeded at the resolvent poles.
  double integral(double rel_tol = 1e-7) const;

 private:
  double raw(double omega) const;
  Eigen::MatrixXd A_;
  Eigen::MatrixXcd M_;  // (Sigma + i Omega/2)
  Eigen::VectorXd v_;
  SpectrumKind kind_;
  double sum_rule_ = 0.0;
  std::vector<double> pole_freqs_, pole_widths_;
};

struct SpectrumResult {
  std::vector<double> omega;
  std::vector<double> value;
  double sum_rule_target = 0.0;  // v^T Sigma v
  double integral = 0.0;         // quadrature of the continuous spectrum
};

// Spectrum on a frequency grid; the steady state is solved internally.
SpectrumResult spectrum(const Eigen::MatrixXd& A, const Eigen::MatrixXd& D,
                        const Eigen::VectorXd& v, const std::vector<double>& omega_grid,
                        SpectrumKind kind = SpectrumKind::asymmetric);

}  // namespace acmech::gauss
