#include "acmech/gaussian.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>

namespace acmech::gauss {

namespace {

void require_finite(const Eigen::MatrixXd& M, const char* name) {
  if (!M.allFinite()) throw std::invalid_argument(std::string(name) + " has non-finite entries");
}

Eigen::MatrixXd checked_symmetric(Eigen::MatrixXd M, const char* name) {
  require_finite(M, name);
  if (M.rows() != M.cols()) throw std::invalid_argument(std::string(name) + " is not square");
  if (M.rows() == 0 || M.rows() % 2 != 0)
    throw std::invalid_argument(std::string(name) + " must be 2n x 2n with n >= 1");
  double scale = std::max(1.0, M.norm());
  if ((M - M.transpose()).norm() > 1e-12 * scale)
    throw std::invalid_argument(std::string(name) + " is not symmetric");
  return ((M + M.transpose()) / 2).eval();
}

void check_channels(const std::vector<LindbladChannel>& channels, int n_modes) {
  for (const auto& ch : channels) {
    if (ch.mode < 0 || ch.mode >= n_modes)
      throw std::invalid_argument("channel mode index out of range");
    if (!(ch.down_rate >= 0.0) || !(ch.up_rate >= 0.0) ||
        !std::isfinite(ch.down_rate) || !std::isfinite(ch.up_rate))
      throw std::invalid_argument("channel rates must be finite and non-negative");
  }
}

}  // namespace

QuadraticModel::QuadraticModel(Eigen::MatrixXd W0) : W0_(checked_symmetric(std::move(W0), "W0")) {
  W1_ = Eigen::MatrixXd::Zero(W0_.rows(), W0_.cols());
}

QuadraticModel::QuadraticModel(Eigen::MatrixXd W0, Eigen::MatrixXd W1, double omega_d)
    : W0_(checked_symmetric(std::move(W0), "W0")),
      W1_(checked_symmetric(std::move(W1), "W1")),
      omega_d_(omega_d),
      driven_(true) {
  if (W1_.rows() != W0_.rows()) throw std::invalid_argument("W0 and W1 sizes differ");
  if (!(omega_d > 0.0) || !std::isfinite(omega_d))
    throw std::invalid_argument("drive frequency must be positive");
}

Eigen::MatrixXd QuadraticModel::W_at(double t) const {
  if (!driven_) return W0_;
  return W0_ + std::cos(omega_d_ * t) * W1_;
}

Eigen::MatrixXd symplectic_form(int n_modes) {
  if (n_modes < 1) throw std::invalid_argument("need at least one mode");
  Eigen::MatrixXd Om = Eigen::MatrixXd::Zero(2 * n_modes, 2 * n_modes);
  for (int i = 0; i < n_modes; ++i) {
    Om(2 * i, 2 * i + 1) = 1.0;
    Om(2 * i + 1, 2 * i) = -1.0;
  }
  return Om;
}

double physicality_deficit(const Eigen::MatrixXd& sigma) {
  const int dim = static_cast<int>(sigma.rows());
  Eigen::MatrixXcd C = sigma.cast<std::complex<double>>();
  C += std::complex<double>(0.0, 0.5) * symplectic_form(dim / 2).cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(C, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

CovarianceState::CovarianceState(Eigen::VectorXd mean_, Eigen::MatrixXd sigma_)
    : mean(std::move(mean_)), sigma(checked_symmetric(std::move(sigma_), "sigma")) {
  if (mean.size() != sigma.rows()) throw std::invalid_argument("mean and sigma sizes differ");
  require_finite(mean, "mean");
  double tol = 1e-9 * std::max(1.0, sigma.norm());
  double deficit = physicality_deficit(sigma);
  if (deficit < -tol)
    throw std::invalid_argument("sigma violates the uncertainty bound (min eig of sigma + i Omega/2 = " +
                                std::to_string(deficit) + ")");
}

CovarianceState thermal_state(const std::vector<double>& occupations) {
  const int n = static_cast<int>(occupations.size());
  if (n < 1) throw std::invalid_argument("need at least one mode");
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    if (!(occupations[i] >= 0.0)) throw std::invalid_argument("occupations must be non-negative");
    sigma(2 * i, 2 * i) = sigma(2 * i + 1, 2 * i + 1) = occupations[i] + 0.5;
  }
  return CovarianceState(Eigen::VectorXd::Zero(2 * n), std::move(sigma));
}

DriftDiffusion build_drift_diffusion(const QuadraticModel& model,
                                     const std::vector<LindbladChannel>& channels, double t) {
  const int n = model.n_modes();
  check_channels(channels, n);
  Eigen::VectorXd kappa = Eigen::VectorXd::Zero(2 * n);
  Eigen::VectorXd diff = Eigen::VectorXd::Zero(2 * n);
  for (const auto& ch : channels) {
    for (int q = 0; q < 2; ++q) {
      kappa(2 * ch.mode + q) += ch.down_rate - ch.up_rate;
      diff(2 * ch.mode + q) += (ch.down_rate + ch.up_rate) / 2;
    }
  }
  DriftDiffusion out;
  out.A = symplectic_form(n) * model.W_at(t) - 0.5 * kappa.asDiagonal().toDenseMatrix();
  out.D = diff.asDiagonal();
  return out;
}

double hurwitz_margin(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("A is not square");
  require_finite(A, "A");
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  return -es.eigenvalues().real().maxCoeff();
}

namespace {

using quad = __float128;

inline quad qabs(quad x) { return x < 0 ? -x : x; }

// column-major dense LU with partial pivoting, solves K x = b in place
void lu_solve(std::vector<quad>& K, std::vector<quad>& b, int m) {
  std::vector<int> piv(m);
  for (int k = 0; k < m; ++k) {
    int p = k;
    quad best = qabs(K[k + k * m]);
    for (int i = k + 1; i < m; ++i) {
      quad a = qabs(K[i + k * m]);
      if (a > best) {
        best = a;
        p = i;
      }
    }
    if (best == 0) throw std::runtime_error("steady-state system is singular");
    piv[k] = p;
    if (p != k)
      for (int j = 0; j < m; ++j) std::swap(K[k + j * m], K[p + j * m]);
    quad d = K[k + k * m];
    for (int i = k + 1; i < m; ++i) {
      quad f = K[i + k * m] / d;
      K[i + k * m] = f;
      for (int j = k + 1; j < m; ++j) K[i + j * m] -= f * K[k + j * m];
    }
  }
  // rows were interchanged wholesale above, so permute b fully before eliminating
  for (int k = 0; k < m; ++k)
    if (piv[k] != k) std::swap(b[k], b[piv[k]]);
  for (int k = 0; k < m; ++k)
    for (int i = k + 1; i < m; ++i) b[i] -= K[i + k * m] * b[k];
  for (int k = m - 1; k >= 0; --k) {
    for (int j = k + 1; j < m; ++j) b[k] -= K[k + j * m] * b[j];
    b[k] /= K[k + k * m];
  }
}

}  // namespace

Eigen::MatrixXd lyapunov_steady_state(const Eigen::MatrixXd& A, const Eigen::MatrixXd& D) {
  const int m = static_cast<int>(A.rows());
  if (A.cols() != m || D.rows() != m || D.cols() != m)
    throw std::invalid_argument("A and D must be square and of equal size");
  require_finite(A, "A");
  require_finite(D, "D");
  double margin = hurwitz_margin(A);
  if (!(margin > 0.0)) throw NotHurwitz(margin);

  // vec(A S + S A^T) = (I (x) A + A (x) I) vec(S); solved in extended
  // precision so the double-rounded result still meets a tight residual.
  const int mm = m * m;
  std::vector<quad> K(static_cast<size_t>(mm) * mm, quad(0));
  std::vector<quad> rhs(mm);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const int row = i + j * m;
      rhs[row] = -quad(D(i, j));
      for (int k = 0; k < m; ++k) {
        K[row + (k + j * m) * mm] += quad(A(i, k));  // (I (x) A)
        K[row + (i + k * m) * mm] += quad(A(j, k));  // (A (x) I)
      }
    }
  lu_solve(K, rhs, mm);

  Eigen::MatrixXd S(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) S(i, j) = static_cast<double>((rhs[i + j * m] + rhs[j + i * m]) / 2);

  // residual of the returned double matrix, accumulated in extended precision
  quad rnorm2 = 0, dnorm2 = 0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      quad r = quad(D(i, j));
      for (int k = 0; k < m; ++k) r += quad(A(i, k)) * quad(S(k, j)) + quad(S(i, k)) * quad(A(j, k));
      rnorm2 += r * r;
      dnorm2 += quad(D(i, j)) * quad(D(i, j));
    }
  if (static_cast<double>(rnorm2) > 1e-20 * static_cast<double>(dnorm2)) {
    const double rel = std::sqrt(static_cast<double>(rnorm2) / static_cast<double>(dnorm2));
    throw std::runtime_error("steady-state residual " + std::to_string(rel) +
                             " of the diffusion norm exceeds 1e-10");
  }
  return S;
}

CovarianceState lyapunov_steady_state(const QuadraticModel& model,
                                      const std::vector<LindbladChannel>& channels) {
  if (model.driven())
    throw std::invalid_argument("steady state is defined for static models only");
  auto [A, D] = build_drift_diffusion(model, channels);
  Eigen::MatrixXd S = lyapunov_steady_state(A, D);
  return CovarianceState(Eigen::VectorXd::Zero(A.rows()), std::move(S));
}

std::vector<double> mode_occupations(const CovarianceState& state) {
  std::vector<double> out;
  out.reserve(state.n_modes());
  for (int i = 0; i < state.n_modes(); ++i) {
    double q2 = state.sigma(2 * i, 2 * i) + state.mean(2 * i) * state.mean(2 * i);
    double p2 = state.sigma(2 * i + 1, 2 * i + 1) + state.mean(2 * i + 1) * state.mean(2 * i + 1);
    out.push_back((q2 + p2 - 1.0) / 2);
  }
  return out;
}

namespace {

struct StepOperator {
  Eigen::MatrixXd Phi;  // e^{A h}
  Eigen::MatrixXd Q;    // accumulated diffusion over the step
};

// Both blocks of the propagated second moment come from one exponential of
// [[-A, D], [0, A^T]] h: the lower-right block is e^{A^T h} and the
// upper-right carries the diffusion integral.
StepOperator van_loan_step(const Eigen::MatrixXd& A, const Eigen::MatrixXd& D, double h) {
  const int m = static_cast<int>(A.rows());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  M.topLeftCorner(m, m) = -A * h;
  M.topRightCorner(m, m) = D * h;
  M.bottomRightCorner(m, m) = A.transpose() * h;
  Eigen::MatrixXd E = M.exp();
  StepOperator op;
  op.Phi = E.bottomRightCorner(m, m).transpose();
  op.Q = op.Phi * E.topRightCorner(m, m);
  op.Q = ((op.Q + op.Q.transpose()) / 2).eval();
  return op;
}

void apply(const StepOperator& op, Eigen::VectorXd& mean, Eigen::MatrixXd& sigma) {
  mean = op.Phi * mean;
  sigma = op.Phi * sigma * op.Phi.transpose() + op.Q;
  sigma = ((sigma + sigma.transpose()) / 2).eval();
}

}  // namespace

std::vector<CovarianceState> evolve_covariance(const QuadraticModel& model,
                                               const std::vector<LindbladChannel>& channels,
                                               const CovarianceState& initial,
                                               const std::vector<double>& times,
                                               const EvolveOptions& opts) {
  if (times.empty()) throw std::invalid_argument("time grid is empty");
  for (size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("times must be strictly increasing");
  if (initial.sigma.rows() != model.dim())
    throw std::invalid_argument("initial state size does not match the model");

  std::vector<CovarianceState> out;
  out.reserve(times.size());
  out.push_back(initial);
  Eigen::VectorXd mean = initial.mean;
  Eigen::MatrixXd sigma = initial.sigma;
  const double span = times.back() - times.front();
  long steps = 0;

  if (!model.driven()) {
    auto [A, D] = build_drift_diffusion(model, channels);
    const double rate = std::max(A.norm(), 1e-300);
    for (size_t i = 1; i < times.size(); ++i) {
      const double dt = times[i] - times[i - 1];
      // cap ||A|| h so e^{-A h} inside the step operator stays well scaled
      long nsub = std::max(1L, static_cast<long>(std::ceil(rate * dt / 20.0)));
      if (steps + nsub > opts.max_steps)
        throw StiffnessError("static evolution needs more than max_steps exponential steps "
                             "(rate * span = " + std::to_string(rate * span) + ")",
                             rate * span);
      StepOperator op = van_loan_step(A, D, dt / static_cast<double>(nsub));
      for (long k = 0; k < nsub; ++k) apply(op, mean, sigma);
      steps += nsub;
      out.emplace_back(mean, sigma);
    }
    return out;
  }

  // driven model: exponential midpoint with step-doubling error control
  const Eigen::MatrixXd Om = symplectic_form(model.n_modes());
  auto dd0 = build_drift_diffusion(QuadraticModel(model.W0()), channels);
  const Eigen::MatrixXd A0 = dd0.A;
  const Eigen::MatrixXd A1 = Om * model.W1();
  const Eigen::MatrixXd D = dd0.D;
  const double rate = std::max(A0.norm() + A1.norm(), 1e-300);
  auto A_at = [&](double t) { return (A0 + std::cos(model.omega_d() * t) * A1).eval(); };

  const double h_cap = std::min(20.0 / rate, 0.2 * 2 * M_PI / model.omega_d());
  double h = h_cap;
  double t = times.front();
  for (size_t i = 1; i < times.size(); ++i) {
    // a residual sliver below roundoff is absorbed into the grid point
    while (times[i] - t > 1e-12 * std::max(span, std::abs(times[i]))) {
      h = std::min(h, times[i] - t);
      if (!(h > span * 1e-15))
        throw StiffnessError("step size underflow at t = " + std::to_string(t) +
                             " (rate * span = " + std::to_string(rate * span) + ")",
                             rate * span);
      Eigen::VectorXd mean_f = mean;
      Eigen::MatrixXd sig_f = sigma;
      apply(van_loan_step(A_at(t + h / 2), D, h), mean_f, sig_f);
      Eigen::VectorXd mean_h = mean;
      Eigen::MatrixXd sig_h = sigma;
      apply(van_loan_step(A_at(t + h / 4), D, h / 2), mean_h, sig_h);
      apply(van_loan_step(A_at(t + 3 * h / 4), D, h / 2), mean_h, sig_h);
      steps += 3;
      if (steps > opts.max_steps)
        throw StiffnessError("driven evolution exceeded max_steps (rate * span = " +
                             std::to_string(rate * span) + ")",
                             rate * span);
      const double err = (sig_f - sig_h).norm() / 3;
      const double tol = opts.rel_tol * std::max(sig_h.norm(), 1e-300);
      if (err <= tol) {
        mean = std::move(mean_h);
        sigma = std::move(sig_h);
        t += h;
      }
      const double grow = (err > 0) ? 0.9 * std::cbrt(tol / err) : 4.0;
      h = std::min(h_cap, h * std::clamp(grow, 0.25, 4.0));
    }
    t = times[i];
    out.emplace_back(mean, sigma);
  }
  return out;
}

SpectrumEvaluator::SpectrumEvaluator(const Eigen::MatrixXd& A, const Eigen::MatrixXd& sigma_ss,
                                     const Eigen::VectorXd& v, SpectrumKind kind)
    : A_(A), v_(v), kind_(kind) {
  const int m = static_cast<int>(A.rows());
  if (A.cols() != m) throw std::invalid_argument("A is not square");
  if (sigma_ss.rows() != m || sigma_ss.cols() != m || v.size() != m)
    throw std::invalid_argument("sigma_ss and v must match A in size");
  require_finite(A, "A");
  M_ = sigma_ss.cast<std::complex<double>>() +
       std::complex<double>(0.0, 0.5) * symplectic_form(m / 2).cast<std::complex<double>>();
  sum_rule_ = v.dot(sigma_ss * v);
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  for (int i = 0; i < m; ++i) {
    const auto lam = es.eigenvalues()(i);
    pole_freqs_.push_back(lam.imag());
    pole_widths_.push_back(std::max(std::abs(lam.real()), 1e-12 * std::abs(lam)));
  }
}

double SpectrumEvaluator::raw(double omega) const {
  const int m = static_cast<int>(A_.rows());
  Eigen::MatrixXcd R = -A_.cast<std::complex<double>>();
  R.diagonal().array() += std::complex<double>(0.0, omega);
  Eigen::VectorXcd z = R.partialPivLu().solve(M_ * v_.cast<std::complex<double>>());
  (void)m;
  return (v_.cast<std::complex<double>>().dot(z)).real() / M_PI;
}

double SpectrumEvaluator::operator()(double omega) const {
  if (kind_ == SpectrumKind::asymmetric) return raw(omega);
  return (raw(omega) + raw(-omega)) / 2;
}

namespace {

// adaptive Simpson on [a, b] with a fixed absolute tolerance budget
double simpson_adapt(const std::function<double(double)>& f, double a, double b, double fa,
                     double fm, double fb, double whole, double tol, int depth) {
  const double m = (a + b) / 2;
  const double lm = (a + m) / 2, rm = (m + b) / 2;
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15 * tol)
    return left + right + (left + right - whole) / 15;
  return simpson_adapt(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson_adapt(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double integrate_panel(const std::function<double(double)>& f, double a, double b, double tol) {
  const double m = (a + b) / 2;
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  return simpson_adapt(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

double SpectrumEvaluator::integral(double rel_tol) const {
  // map w = s tan(theta) and seed panel edges at the resolvent poles
  std::vector<double> freqs;
  double wmax = 0;
  for (size_t i = 0; i < pole_freqs_.size(); ++i) {
    wmax = std::max(wmax, std::abs(pole_freqs_[i]));
    for (double c : {-100.0, -30.0, -10.0, -3.0, -1.0, 0.0, 1.0, 3.0, 10.0, 30.0, 100.0}) {
      freqs.push_back(pole_freqs_[i] + c * pole_widths_[i]);
      freqs.push_back(-pole_freqs_[i] + c * pole_widths_[i]);
    }
  }
  const double s = std::max(wmax / 3, 1e-300);
  std::vector<double> edges;
  edges.push_back(-M_PI / 2 + 1e-8);
  edges.push_back(M_PI / 2 - 1e-8);
  for (double w : freqs) {
    double th = std::atan(w / s);
    if (th > edges[0] && th < edges[1]) edges.push_back(th);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-13; }),
              edges.end());

  std::function<double(double)> g = [&](double th) {
    const double c = std::cos(th);
    return (*this)(s * std::tan(th)) * s / (c * c);
  };
  const double tol = rel_tol * std::max(std::abs(sum_rule_), 1e-300);
  double total = 0;
  for (size_t i = 0; i + 1 < edges.size(); ++i)
    total += integrate_panel(g, edges[i], edges[i + 1],
                             tol * (edges[i + 1] - edges[i]) / M_PI);
  return total;
}

SpectrumResult spectrum(const Eigen::MatrixXd& A, const Eigen::MatrixXd& D,
                        const Eigen::VectorXd& v, const std::vector<double>& omega_grid,
                        SpectrumKind kind) {
  Eigen::MatrixXd sigma = lyapunov_steady_state(A, D);
  SpectrumEvaluator eval(A, sigma, v, kind);
  SpectrumResult res;
  res.omega = omega_grid;
  res.value.reserve(omega_grid.size());
  for (double w : omega_grid) res.value.push_back(eval(w));
  res.sum_rule_target = eval.sum_rule_target();
  res.integral = eval.integral();
  return res;
}

}  // namespace acmech::gauss
