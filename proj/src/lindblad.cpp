#include "qbattery/lindblad.hpp"

#include <Eigen/Sparse>
#include <cmath>
#include <numeric>
#include <unsupported/Eigen/MatrixFunctions>

#include "qbattery/metrics.hpp"
#include "qbattery/ode.hpp"

namespace qb {

ComplexMatrix liouvillian_apply(const ComplexMatrix& H, const ComplexMatrix& L, double gamma,
                                const ComplexMatrix& rho) {
  if (H.rows() != rho.rows() || L.rows() != rho.rows() || rho.rows() != rho.cols())
    throw Error(ErrorKind::DimMismatch, "liouvillian_apply: dimensions differ");
  const cplx I(0.0, 1.0);
  ComplexMatrix out = -I * (H * rho - rho * H);
  if (gamma != 0.0) {
    const ComplexMatrix L2 = L * L;
    out += gamma * (L * rho * L - 0.5 * (L2 * rho + rho * L2));
  }
  return out;
}

ComplexMatrix liouvillian_apply(const ModelSpec& model, const ComplexMatrix& rho) {
  return liouvillian_apply(model.hamiltonian, model.jump, model.params.gamma_C, rho);
}

namespace {

// Generator on row-major vec of an (a,b) block: X -> A X B maps to kron(A, B^T).
ComplexMatrix block_generator(const ComplexMatrix& Ha, const ComplexMatrix& Hb,
                              const ComplexMatrix& La, const ComplexMatrix& Lb, double gamma) {
  const cplx I(0.0, 1.0);
  const auto na = Ha.rows(), nb = Hb.rows();
  const ComplexMatrix Ia = ComplexMatrix::Identity(na, na), Ib = ComplexMatrix::Identity(nb, nb);
  ComplexMatrix G = -I * (kron(Ha, Ib) - kron(Ia, Hb.transpose()));
  if (gamma != 0.0) {
    const ComplexMatrix La2 = La * La, Lb2 = Lb * Lb;
    G += gamma * (kron(La, Lb.transpose()) - 0.5 * kron(La2, Ib) - 0.5 * kron(Ia, Lb2.transpose()));
  }
  return G;
}

ComplexMatrix restrict(const ComplexMatrix& m, const std::vector<int>& rows,
                       const std::vector<int>& cols) {
  ComplexMatrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  return out;
}

bool is_diagonal(const ComplexMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != 0.0) return false;
  return true;
}

// Exact propagation of the nonzero Liouvillian blocks of a state.
class BlockEngine {
 public:
  struct Block {
    const std::vector<int>* ra;
    const std::vector<int>* rb;
    ComplexMatrix gen;
    ComplexMatrix step;
    ComplexVector v;
  };

  // `restrict_to`: if nonempty, keep only blocks that these operators can see.
  BlockEngine(const ModelSpec& m, const Sectors& s, const ComplexMatrix& rho0,
              const std::vector<const ComplexMatrix*>& restrict_to)
      : dim_(m.dim()) {
    const auto K = s.members.size();
    for (std::size_t a = 0; a < K; ++a)
      for (std::size_t b = 0; b < K; ++b) {
        const auto& ra = s.members[a];
        const auto& rb = s.members[b];
        ComplexMatrix r = restrict(rho0, ra, rb);
        if (r.cwiseAbs().maxCoeff() == 0.0) continue;
        if (!restrict_to.empty()) {
          bool seen = false;
          for (const ComplexMatrix* op : restrict_to)
            if (restrict(*op, rb, ra).cwiseAbs().maxCoeff() != 0.0) seen = true;
          if (!seen) continue;
        }
        Block blk;
        blk.ra = &ra;
        blk.rb = &rb;
        blk.gen = block_generator(restrict(m.hamiltonian, ra, ra), restrict(m.hamiltonian, rb, rb),
                                  restrict(m.jump, ra, ra), restrict(m.jump, rb, rb),
                                  m.params.gamma_C);
        blk.v = Eigen::Map<const ComplexVector>(ComplexMatrix(r.transpose()).data(), r.size());
        blocks_.push_back(std::move(blk));
      }
  }

  static std::size_t max_block(const Sectors& s, const ComplexMatrix& rho0) {
    std::size_t best = 0;
    for (const auto& ra : s.members)
      for (const auto& rb : s.members) {
        const std::size_t n = ra.size() * rb.size();
        if (n <= best) continue;
        if (restrict(rho0, ra, rb).cwiseAbs().maxCoeff() != 0.0) best = n;
      }
    return best;
  }

  void advance(double dt) {
    if (dt == 0.0) return;
    if (dt != cached_dt_) {
      for (auto& b : blocks_) b.step = (b.gen * cplx(dt)).exp();
      cached_dt_ = dt;
    }
    for (auto& b : blocks_) b.v = b.step * b.v;
  }

  ComplexMatrix assemble() const {
    ComplexMatrix rho = ComplexMatrix::Zero(dim_, dim_);
    for (const auto& b : blocks_) {
      const auto nb = b.rb->size();
      for (std::size_t i = 0; i < b.ra->size(); ++i)
        for (std::size_t j = 0; j < nb; ++j) rho((*b.ra)[i], (*b.rb)[j]) = b.v(i * nb + j);
    }
    return rho;
  }

  // Tr[rho O] from the propagated blocks only.
  cplx trace_with(const ComplexMatrix& op) const {
    cplx acc = 0.0;
    for (const auto& b : blocks_) {
      const auto nb = b.rb->size();
      for (std::size_t i = 0; i < b.ra->size(); ++i)
        for (std::size_t j = 0; j < nb; ++j) {
          const cplx o = op((*b.rb)[j], (*b.ra)[i]);
          if (o != 0.0) acc += o * b.v(i * nb + j);
        }
    }
    return acc;
  }

 private:
  int dim_;
  double cached_dt_ = std::numeric_limits<double>::quiet_NaN();
  std::vector<Block> blocks_;
};

// Right-hand side for the adaptive path; exploits sparse H and diagonal L.
class LiouvilleRhs {
 public:
  explicit LiouvilleRhs(const ModelSpec& m) : gamma_(m.params.gamma_C) {
    const auto d = m.dim();
    const double nnz = static_cast<double>((m.hamiltonian.array() != cplx(0.0)).count());
    sparse_ = d >= 16 && nnz < 0.25 * d * d;
    if (sparse_)
      Hs_ = m.hamiltonian.sparseView();
    else
      H_ = m.hamiltonian;
    diag_ = is_diagonal(m.jump);
    if (diag_) {
      W_.resize(d, d);
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) {
          const double dl = (m.jump(i, i) - m.jump(j, j)).real();
          W_(i, j) = -0.5 * gamma_ * dl * dl;
        }
    } else {
      L_ = m.jump;
      L2_ = L_ * L_;
    }
  }

  void operator()(double, const ComplexMatrix& rho, ComplexMatrix& out) const {
    const cplx mi(0.0, -1.0);
    if (sparse_)
      out.noalias() = mi * (Hs_ * rho);
    else
      out.noalias() = mi * (H_ * rho);
    if (sparse_)
      out.noalias() -= mi * (rho * Hs_);
    else
      out.noalias() -= mi * (rho * H_);
    if (gamma_ == 0.0) return;
    if (diag_)
      out += W_.cwiseProduct(rho);
    else
      out += gamma_ * (L_ * rho * L_ - 0.5 * (L2_ * rho + rho * L2_));
  }

 private:
  double gamma_;
  bool sparse_ = false, diag_ = false;
  Eigen::SparseMatrix<cplx, Eigen::RowMajor> Hs_;
  ComplexMatrix H_, L_, L2_, W_;
};

struct Recorder {
  const ModelSpec& model;
  const IntegrateOptions& opt;
  TimeSeries& ts;
  ComplexMatrix h_full;
  bool check_spectrum;

  Recorder(const ModelSpec& m, const IntegrateOptions& o, TimeSeries& t)
      : model(m), opt(o), ts(t), check_spectrum(o.check_invariants && m.dim() <= 64) {
    if (opt.energy) ts.add("energy");
    if (opt.ergotropy) ts.add("ergotropy");
    if (opt.entropy) ts.add("entropy");
    for (const auto& [name, op] : opt.observables) ts.add(name);
  }

  void record(const ComplexMatrix& rho) {
    if (opt.check_invariants) {
      ts.max_trace_error = std::max(ts.max_trace_error, std::abs(rho.trace() - cplx(1.0)));
      if (check_spectrum) {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho, Eigen::EigenvaluesOnly);
        ts.min_eigenvalue = std::min(ts.min_eigenvalue, es.eigenvalues()(0));
      }
    }
    if (opt.energy || opt.ergotropy || opt.entropy) {
      const ComplexMatrix rb = battery_state(model, rho);
      if (opt.energy) ts.col("energy").push_back(energy(rb, model.battery_h));
      if (opt.ergotropy) ts.col("ergotropy").push_back(ergotropy(rb, model.battery_h));
      if (opt.entropy) ts.col("entropy").push_back(entropy(rb));
    }
    for (const auto& [name, op] : opt.observables) ts.col(name).push_back(expect(op, rho).real());
    if (opt.store_states) ts.states.push_back(rho);
  }
};

void validate_grid(const std::vector<double>& t) {
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw Error(ErrorKind::InvalidArgument, "time grid not increasing");
}

}  // namespace

ComplexMatrix liouvillian_matrix(const ModelSpec& m) {
  return block_generator(m.hamiltonian, m.hamiltonian, m.jump, m.jump, m.params.gamma_C);
}

Sectors hilbert_sectors(const ComplexMatrix& H, const ComplexMatrix& L) {
  const auto d = static_cast<int>(H.rows());
  std::vector<int> parent(d);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (H(i, j) != 0.0 || L(i, j) != 0.0) parent[find(i)] = find(j);
  Sectors s;
  s.sector_of.assign(d, -1);
  std::vector<int> root_to_sector(d, -1);
  for (int i = 0; i < d; ++i) {
    const int r = find(i);
    if (root_to_sector[r] < 0) {
      root_to_sector[r] = static_cast<int>(s.members.size());
      s.members.emplace_back();
    }
    s.sector_of[i] = root_to_sector[r];
    s.members[root_to_sector[r]].push_back(i);
  }
  return s;
}

TimeSeries integrate(const ModelSpec& model, const ComplexMatrix& rho0,
                     const std::vector<double>& t_grid, const IntegrateOptions& opt) {
  if (rho0.rows() != model.dim() || rho0.cols() != model.dim())
    throw Error(ErrorKind::DimMismatch, "integrate: initial state dimension");
  validate_grid(t_grid);
  TimeSeries ts;
  ts.times = t_grid;
  Recorder rec(model, opt, ts);

  const Sectors sectors = hilbert_sectors(model.hamiltonian, model.jump);
  Method method = opt.method;
  if (method == Method::Auto)
    method = BlockEngine::max_block(sectors, rho0) <= static_cast<std::size_t>(opt.exact_block_limit)
                 ? Method::Exact
                 : Method::Adaptive;

  if (method == Method::Exact) {
    // Linear observables only: propagate just the blocks that feed them.
    const bool linear_only = !opt.ergotropy && !opt.entropy && !opt.store_states &&
                             !opt.check_invariants;
    ComplexMatrix h_full;
    std::vector<const ComplexMatrix*> ops;
    if (linear_only) {
      if (opt.energy) {
        h_full = kron(identity(model.charger_dim()), model.battery_h);
        ops.push_back(&h_full);
      }
      for (const auto& kv : opt.observables) ops.push_back(&kv.second);
    }
    BlockEngine engine(model, sectors, rho0, ops);
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      if (i > 0) engine.advance(t_grid[i] - t_grid[i - 1]);
      if (linear_only) {
        if (opt.energy) ts.col("energy").push_back(engine.trace_with(h_full).real());
        for (const auto& [name, op] : opt.observables)
          ts.col(name).push_back(engine.trace_with(op).real());
      } else {
        rec.record(hermitize(engine.assemble()));
      }
    }
    return ts;
  }

  OdeOptions oo;
  oo.rtol = opt.rtol;
  oo.atol = opt.atol;
  LiouvilleRhs rhs(model);
  DormandPrince<ComplexMatrix> dp(
      [&rhs](double t, const ComplexMatrix& y, ComplexMatrix& dy) { rhs(t, y, dy); },
      [](const ComplexMatrix& a, const ComplexMatrix& b, const ComplexMatrix& e, double rt,
         double at) { return scaled_max_norm(a, b, e, rt, at); },
      oo);
  dp.set_post_step([&ts](ComplexMatrix& y) {
    ts.max_hermiticity_drift = std::max(ts.max_hermiticity_drift, hermiticity_error(y));
    y = hermitize(y);
  });
  dp.integrate(rho0, t_grid, [&rec](std::size_t, const ComplexMatrix& y) { rec.record(y); });
  return ts;
}

ExpSum observable_terms(const ModelSpec& model, const ComplexMatrix& rho0,
                        const ComplexMatrix& op) {
  if (rho0.rows() != model.dim() || op.rows() != model.dim())
    throw Error(ErrorKind::DimMismatch, "observable_terms: dimensions differ");
  const Sectors s = hilbert_sectors(model.hamiltonian, model.jump);
  ExpSum out;
  for (const auto& ra : s.members)
    for (const auto& rb : s.members) {
      const ComplexMatrix r = restrict(rho0, ra, rb);
      const ComplexMatrix o = restrict(op, rb, ra);
      if (r.cwiseAbs().maxCoeff() == 0.0 || o.cwiseAbs().maxCoeff() == 0.0) continue;
      const ComplexMatrix G =
          block_generator(restrict(model.hamiltonian, ra, ra), restrict(model.hamiltonian, rb, rb),
                          restrict(model.jump, ra, ra), restrict(model.jump, rb, rb),
                          model.params.gamma_C);
      const auto nb = rb.size();
      ComplexVector v(r.size()), w(r.size());
      for (std::size_t i = 0; i < ra.size(); ++i)
        for (std::size_t j = 0; j < nb; ++j) {
          v(i * nb + j) = r(i, j);
          w(i * nb + j) = o(j, i);
        }
      out.append(spectral_expsum(G, v, w));
    }
  out.simplify(1e-16);
  return out;
}

ComplexMatrix propagate(const ModelSpec& model, const ComplexMatrix& rho0, double t,
                        const IntegrateOptions& opt) {
  if (t == 0.0) return rho0;
  IntegrateOptions o = opt;
  o.energy = o.ergotropy = o.entropy = false;
  o.observables.clear();
  o.store_states = true;
  o.check_invariants = false;
  TimeSeries ts = integrate(model, rho0, {0.0, t}, o);
  return ts.states.back();
}

double steady_fallback_time(const Params& p) {
  double span = p.g > 0 ? 1.0 / p.g : 1.0;
  if (p.gamma_C > 0) span = std::max(span, 1.0 / p.gamma_C);
  if (p.g > 0) span = std::max(span, p.gamma_C / (p.g * p.g));
  return 50.0 * span;
}

ComplexMatrix steady_state(const ModelSpec& model, const SteadyStateOptions& opt,
                           SteadyStateInfo* info) {
  if (!(model.params.gamma_C > 0))
    throw Error(ErrorKind::InvalidArgument, "steady_state requires gamma_C > 0");
  SteadyStateInfo local;
  SteadyStateInfo& inf = info ? *info : local;
  inf = {};

  const Sectors s = hilbert_sectors(model.hamiltonian, model.jump);
  bool computable = true;
  for (const auto& ra : s.members)
    if (ra.size() * ra.size() > static_cast<std::size_t>(opt.null_space_block_limit))
      computable = false;

  if (computable) {
    int null_dim = 0;
    ComplexMatrix candidate;
    for (const auto& ra : s.members)
      for (const auto& rb : s.members) {
        const ComplexMatrix G = block_generator(
            restrict(model.hamiltonian, ra, ra), restrict(model.hamiltonian, rb, rb),
            restrict(model.jump, ra, ra), restrict(model.jump, rb, rb), model.params.gamma_C);
        Eigen::BDCSVD<ComplexMatrix> svd(G, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        const double tol = opt.null_tol * std::max(1.0, sv(0));
        for (Eigen::Index k = 0; k < sv.size(); ++k) {
          if (sv(k) > tol) continue;
          ++null_dim;
          if (&ra == &rb) {
            const ComplexVector v = svd.matrixV().col(k);
            ComplexMatrix r = ComplexMatrix::Zero(model.dim(), model.dim());
            for (std::size_t i = 0; i < ra.size(); ++i)
              for (std::size_t j = 0; j < ra.size(); ++j) r(ra[i], ra[j]) = v(i * ra.size() + j);
            candidate = r;
          }
        }
      }
    inf.null_dim = null_dim;
    if (null_dim == 1 && candidate.size() > 0 && std::abs(candidate.trace()) > 1e-12) {
      candidate /= candidate.trace();
      return hermitize(candidate);
    }
    if (null_dim > 1 && opt.strict)
      throw Error(ErrorKind::DegenerateSteadyState,
                  "Liouvillian null space has dimension " + std::to_string(null_dim));
  }

  // Long-time propagation from the physical initial state, doubling until converged.
  inf.fallback = true;
  double chunk = opt.fallback_time > 0 ? opt.fallback_time : steady_fallback_time(model.params);
  ComplexMatrix rho = propagate(model, initial_state(model), chunk);
  inf.time = chunk;
  for (int k = 0; k < opt.max_extensions; ++k) {
    ComplexMatrix next = propagate(model, rho, chunk);
    inf.time += chunk;
    const double change = (next - rho).cwiseAbs().maxCoeff();
    rho = next;
    if (change < opt.converge_tol) return hermitize(rho);
    chunk *= 2;
  }
  throw Error(ErrorKind::NotConverged,
              "steady-state propagation not converged after t=" + std::to_string(inf.time));
}

ComplexMatrix povm_average_channel(const ComplexMatrix& rho, const ComplexMatrix& jump,
                                   double gamma, double dt) {
  const auto es = herm_eig(jump);
  const ComplexMatrix& V = es.eigenvectors;
  ComplexMatrix r = V.adjoint() * rho * V;
  for (Eigen::Index m = 0; m < r.rows(); ++m)
    for (Eigen::Index n = 0; n < r.cols(); ++n) {
      const double dl = es.eigenvalues(m) - es.eigenvalues(n);
      r(m, n) *= std::exp(-0.5 * gamma * dt * dl * dl);
    }
  return V * r * V.adjoint();
}

}  // namespace qb
