#include "qbattery/moments.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include "qbattery/ode.hpp"

namespace qb {

namespace {

struct Cx {
  int re, im;
};

// Builder for real-split complex linear equations.
class Assembler {
 public:
  explicit Assembler(int n) : M(Eigen::MatrixXd::Zero(n, n)) {}

  // X' += c * Y
  void cc(Cx x, Cx y, cplx c) {
    M(x.re, y.re) += c.real();
    M(x.re, y.im) -= c.imag();
    M(x.im, y.re) += c.imag();
    M(x.im, y.im) += c.real();
  }
  // X' += c * y, y real
  void cr(Cx x, int y, cplx c) {
    M(x.re, y) += c.real();
    M(x.im, y) += c.imag();
  }
  // x' += c * Im Y, x real
  void r_im(int x, Cx y, double c) { M(x, y.im) += c; }

  Eigen::MatrixXd M;
};

const cplx I(0.0, 1.0);

}  // namespace

void MomentSystem::validate() const {
  const auto n = v0.size();
  if (matrix.rows() != n || matrix.cols() != n || inhomogeneity.size() != n ||
      static_cast<Eigen::Index>(labels.size()) != n)
    throw Error(ErrorKind::DimMismatch, "moment system components have inconsistent sizes");
  if (energy_weights.size() != 0 && energy_weights.size() != n)
    throw Error(ErrorKind::DimMismatch, "energy weights size");
}

std::pair<MomentSystem, MomentSystem> tls_moment_systems(const Params& p) {
  p.validate();
  const double g = p.g, F = p.F, gm = p.gamma_C;
  const double dC = p.delta_Cd, dB = p.delta_Bd, dCB = p.delta_CB();

  MomentSystem s1;
  {
    const int zB = 0, zC = 1;
    const Cx A{2, 3}, Bq{4, 5}, Cq{6, 7}, s{8, 9};
    Assembler a(10);
    a.r_im(zB, A, -4 * g);
    a.r_im(zC, s, -4 * F);
    a.r_im(zC, A, 4 * g);
    a.cc(A, Bq, -I * F);
    a.cr(A, zC, -I * g / 2.0);
    a.cr(A, zB, I * g / 2.0);
    a.cc(A, A, -gm / 2 + I * dCB);
    a.cc(Bq, A, -2.0 * I * F);
    a.cc(Bq, Cq, 2.0 * I * F);
    a.cc(Bq, s, I * g);
    a.cc(Bq, Bq, -I * dB);
    a.cc(Cq, Bq, I * F);
    a.cc(Cq, Cq, -gm / 2 - I * (dC + dB));
    a.cr(s, zC, I * F);
    a.cc(s, Bq, I * g);
    a.cc(s, s, -gm / 2 - I * dC);
    s1.matrix = a.M;
    s1.v0 = Eigen::VectorXd::Zero(10);
    s1.v0(zB) = s1.v0(zC) = -1.0;
    s1.labels = {"<sz_B>",         "<sz_C>",         "Re<sp_C sm_B>", "Im<sp_C sm_B>",
                 "Re<sz_C sm_B>",  "Im<sz_C sm_B>",  "Re<sm_C sm_B>", "Im<sm_C sm_B>",
                 "Re<sm_C>",       "Im<sm_C>"};
    s1.energy_weights = Eigen::VectorXd::Zero(10);
    s1.energy_weights(zB) = p.omega_B / 2;
    s1.energy_offset = p.omega_B / 2;
  }
  s1.inhomogeneity = Eigen::VectorXd::Zero(10);

  MomentSystem s2;
  {
    const Cx x{0, 1}, y{2, 3};
    const int zz = 4;
    Assembler a(5);
    a.cc(x, y, I * g);
    a.cc(x, x, -I * dB);
    a.cr(y, zz, I * F);
    a.cc(y, y, -gm / 2 - I * dC);
    a.cc(y, x, I * g);
    a.r_im(zz, y, -4 * F);
    s2.matrix = a.M;
    s2.v0 = Eigen::VectorXd::Zero(5);
    s2.v0(zz) = 1.0;
    s2.labels = {"Re<sm_B>", "Im<sm_B>", "Re<sm_C sz_B>", "Im<sm_C sz_B>", "<sz_C sz_B>"};
  }
  s2.inhomogeneity = Eigen::VectorXd::Zero(5);
  return {s1, s2};
}

MomentSystem ho_resonant_moment_system(const Params& p) {
  p.validate();
  if (!p.resonant())
    throw Error(ErrorKind::RequiresResonance, "resonant HO moment system needs zero detunings");
  if (!(p.g > 0)) throw ValidationError("g", "must be positive for the displaced frame");
  const double g = p.g, gm = p.gamma_C, r = p.F / p.g;
  const Cx aC{0, 1}, aB{2, 3}, X{5, 6};
  const int nC = 4, nB = 7;
  Assembler a(8);
  a.cc(aC, aB, -I * g);
  a.cc(aC, aC, -gm / 2);
  a.cc(aB, aC, -I * g);
  a.r_im(nC, X, 2 * g);
  a.cr(X, nC, -I * g);
  a.cr(X, nB, I * g);
  a.cc(X, X, -gm / 2);
  a.r_im(nB, X, -2 * g);

  MomentSystem s;
  s.matrix = a.M;
  s.inhomogeneity = Eigen::VectorXd::Zero(8);
  s.v0 = Eigen::VectorXd::Zero(8);
  s.v0(aB.re) = r;
  s.v0(nB) = r * r;
  s.labels = {"Re<a_C>", "Im<a_C>", "Re<a_B>", "Im<a_B>", "<n_C>", "Re<ad_C a_B>", "Im<ad_C a_B>",
              "<n_B>"};
  s.energy_weights = Eigen::VectorXd::Zero(8);
  s.energy_weights(nB) = p.omega_B;
  s.energy_weights(aB.re) = -2 * r * p.omega_B;
  s.energy_offset = r * r * p.omega_B;
  return s;
}

MomentSystem ho_detuned_moment_system(const Params& p) {
  p.validate();
  const double g = p.g, F = p.F, gm = p.gamma_C;
  const int nB = 0, nC = 1;
  const Cx X{3, 2}, aB{4, 5}, aC{6, 7};
  Assembler a(8);
  a.r_im(nB, X, -2 * g);
  a.r_im(nC, aC, -2 * F);
  a.r_im(nC, X, 2 * g);
  a.cc(X, aB, I * F);
  a.cr(X, nC, -I * g);
  a.cr(X, nB, I * g);
  a.cc(X, X, -gm / 2 + I * p.delta_CB());
  a.cc(aB, aC, -I * g);
  a.cc(aB, aB, -I * p.delta_Bd);
  a.cc(aC, aB, -I * g);
  a.cc(aC, aC, -gm / 2 - I * p.delta_Cd);

  MomentSystem s;
  s.matrix = a.M;
  s.inhomogeneity = Eigen::VectorXd::Zero(8);
  s.inhomogeneity(aC.im) = -F;
  s.v0 = Eigen::VectorXd::Zero(8);
  s.labels = {"<n_B>", "<n_C>", "Im<ad_C a_B>", "Re<ad_C a_B>", "Re<a_B>", "Im<a_B>", "Re<a_C>",
              "Im<a_C>"};
  s.energy_weights = Eigen::VectorXd::Zero(8);
  s.energy_weights(nB) = p.omega_B;
  return s;
}

ExpSum moment_energy_terms(const MomentSystem& sys) {
  sys.validate();
  if (!sys.homogeneous())
    throw Error(ErrorKind::InvalidArgument, "spectral energy needs a homogeneous system");
  if (sys.energy_weights.size() != sys.dim())
    throw Error(ErrorKind::InvalidArgument, "system carries no energy weights");
  ExpSum e = spectral_expsum(sys.matrix.cast<cplx>(), sys.v0.cast<cplx>(),
                             sys.energy_weights.cast<cplx>());
  e.offset += sys.energy_offset;
  e.simplify(1e-16);
  return e;
}

TimeSeries evolve_moments(const MomentSystem& sys, const std::vector<double>& t_grid,
                          MomentPath path) {
  sys.validate();
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1]))
      throw Error(ErrorKind::InvalidArgument, "time grid not increasing");
  const int n = sys.dim();
  TimeSeries ts;
  ts.times = t_grid;
  for (const auto& l : sys.labels) ts.add(l);
  const bool has_energy = sys.energy_weights.size() == n;
  if (has_energy) ts.add("energy");

  auto record = [&](const Eigen::VectorXd& v) {
    for (int k = 0; k < n; ++k) ts.columns[k].push_back(v(k));
    if (has_energy) ts.col("energy").push_back(sys.energy_weights.dot(v) + sys.energy_offset);
  };

  const bool homogeneous = sys.homogeneous();
  Eigen::FullPivLU<Eigen::MatrixXd> lu;
  bool invertible = true;
  if (!homogeneous) {
    lu.compute(sys.matrix);
    invertible = lu.isInvertible() && lu.rcond() > 1e-10;
  }
  if (path == MomentPath::Exponential && !invertible)
    throw Error(ErrorKind::SingularMatrix, "inhomogeneous system with singular matrix");
  if (path == MomentPath::Auto) {
    path = invertible ? MomentPath::Exponential : MomentPath::Ode;
    if (!invertible) ts.warnings.push_back("singular moment matrix: adaptive ODE path used");
  }

  if (path == MomentPath::Exponential) {
    Eigen::VectorXd particular;
    if (!homogeneous) particular = lu.solve(sys.inhomogeneity);
    for (double t : t_grid) {
      const Eigen::MatrixXd E = (sys.matrix * t).exp();
      Eigen::VectorXd v = E * sys.v0;
      if (!homogeneous) v += E * particular - particular;
      record(v);
    }
    return ts;
  }

  OdeOptions oo;
  oo.rtol = 1e-12;
  oo.atol = 1e-14;
  DormandPrince<Eigen::VectorXd> dp(
      [&sys](double, const Eigen::VectorXd& v, Eigen::VectorXd& dv) {
        dv = sys.matrix * v + sys.inhomogeneity;
      },
      [](const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& e, double rt,
         double at) { return scaled_max_norm(a, b, e, rt, at); },
      oo);
  dp.integrate(sys.v0, t_grid, [&](std::size_t, const Eigen::VectorXd& v) { record(v); });
  return ts;
}

}  // namespace qb
