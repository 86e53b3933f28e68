#include "ising/trw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "ising/errors.hpp"

namespace ising {

namespace {

constexpr double kMeanBox = 1.0 - 1e-12;    // box constraint on candidate means
constexpr double kAtanhClip = 1.0 - 1e-15;  // clip for artanh arguments
constexpr int kSigns[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};

double clamp_unit(double x, double limit) { return std::clamp(x, -limit, limit); }

void check_model(const IsingModel& model) {
  for (double j : model.couplings())
    if (!std::isfinite(j)) throw DomainError("trw: non-finite coupling");
  for (double h : model.biases())
    if (!std::isfinite(h)) throw DomainError("trw: non-finite bias");
}

struct Workspace {
  const IsingModel* model = nullptr;
  const Graph* graph = nullptr;
  int n = 0;
  std::vector<double> rho;          // per edge
  std::vector<double> t_tilde;      // tanh(J_k / rho_k)
  std::vector<double> rho_deficit;  // 1 - sum_k rho_k at each vertex
};

Workspace make_workspace(const IsingModel& model, const EdgeAppearance& rho) {
  Workspace w;
  w.model = &model;
  w.graph = &model.graph();
  w.n = w.graph->vertex_count();
  w.rho = rho.rho;
  w.t_tilde.resize(w.graph->edge_count());
  for (int k = 0; k < w.graph->edge_count(); ++k)
    w.t_tilde[k] = std::tanh(model.couplings()[k] / w.rho[k]);
  w.rho_deficit.assign(w.n, 1.0);
  for (int k = 0; k < w.graph->edge_count(); ++k) {
    w.rho_deficit[w.graph->edges()[k].i] -= w.rho[k];
    w.rho_deficit[w.graph->edges()[k].j] -= w.rho[k];
  }
  return w;
}

// Local field theta_i = h_i + sum over incident edges of rho artanh(t f).
double local_field(const Workspace& w, const std::vector<double>& m, int i) {
  double theta = w.model->biases()[i];
  for (const auto& [j, k] : w.graph->neighbors(i)) {
    const double u =
        clamp_unit(w.t_tilde[k] * f_aux(m[j], m[i], w.t_tilde[k]), kAtanhClip);
    theta += w.rho[k] * std::atanh(u);
  }
  return theta;
}

double residual_inf(const Workspace& w, const std::vector<double>& m) {
  double res = 0.0;
  for (int i = 0; i < w.n; ++i)
    res = std::max(res, std::abs(m[i] - std::tanh(local_field(w, m, i))));
  return res;
}

// ---- Stage 1: damped Gauss-Seidel iteration --------------------------------

struct StageResult {
  std::vector<double> m;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

StageResult gauss_seidel(const Workspace& w, std::vector<double> m, double tol,
                         int budget) {
  StageResult out;
  out.m = m;
  double lambda = 0.5;
  double res_window = std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int it = 0; it < budget; ++it) {
    double sweep_res = 0.0;
    for (int i = 0; i < w.n; ++i) {
      const double target = std::tanh(local_field(w, m, i));
      sweep_res = std::max(sweep_res, std::abs(m[i] - target));
      m[i] = (1.0 - lambda) * m[i] + lambda * target;
    }
    out.iterations = it + 1;
    if (sweep_res < best) {
      best = sweep_res;
      out.m = m;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (sweep_res <= tol) {
      const double true_res = residual_inf(w, m);
      if (true_res <= tol) {
        out.m = m;
        out.residual = true_res;
        out.converged = true;
        return out;
      }
    }
    if ((it + 1) % 50 == 0) {
      if (sweep_res > 0.95 * res_window) lambda = std::max(lambda / 2.0, 0.05);
      res_window = sweep_res;
    }
    if (since_best > 200 && best > tol) break;  // stalled; hand off
  }
  out.residual = residual_inf(w, out.m);
  out.converged = out.residual <= tol;
  return out;
}

// ---- Stage 2: Newton minimization of the reweighted free energy ------------

double free_energy_value(const Workspace& w, const std::vector<double>& m) {
  const IsingModel& model = *w.model;
  double energy = 0.0;
  double entropy = 0.0;
  for (int i = 0; i < w.n; ++i) {
    energy -= model.biases()[i] * m[i];
    const double qp = (1.0 + m[i]) / 2.0, qm = (1.0 - m[i]) / 2.0;
    double h1 = 0.0;
    if (qp > 0.0) h1 -= qp * std::log(std::max(qp, 1e-300));
    if (qm > 0.0) h1 -= qm * std::log(std::max(qm, 1e-300));
    entropy += w.rho_deficit[i] * h1;
  }
  for (int k = 0; k < w.graph->edge_count(); ++k) {
    const int i = w.graph->edges()[k].i, j = w.graph->edges()[k].j;
    const double c =
        stationary_edge_covariance(m[i], m[j], model.couplings()[k], w.rho[k]);
    energy -= model.couplings()[k] * (m[i] * m[j] + c);
    double h2 = 0.0;
    for (const auto& s : kSigns) {
      const double q = 0.25 * (1.0 + m[i] * s[0] + m[j] * s[1] +
                               (m[i] * m[j] + c) * s[0] * s[1]);
      if (q > 0.0) h2 -= q * std::log(std::max(q, 1e-300));
    }
    entropy += w.rho[k] * h2;
  }
  return energy - entropy;
}

struct GradHess {
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

// Envelope gradient of g(m) = min_c F(m, c) and its Schur-complement
// Hessian: each edge covariance couples to nothing but its own edge, so the
// c-block of the full Hessian is diagonal and eliminates exactly.
GradHess free_energy_grad_hess(const Workspace& w, const std::vector<double>& m) {
  const IsingModel& model = *w.model;
  GradHess gh;
  gh.grad = Eigen::VectorXd::Zero(w.n);
  gh.hess = Eigen::MatrixXd::Zero(w.n, w.n);
  for (int i = 0; i < w.n; ++i) {
    const double mi = clamp_unit(m[i], kMeanBox);
    gh.grad[i] = -model.biases()[i] + w.rho_deficit[i] * std::atanh(mi);
    gh.hess(i, i) = w.rho_deficit[i] / std::max(1.0 - mi * mi, 1e-16);
  }
  for (int k = 0; k < w.graph->edge_count(); ++k) {
    const int i = w.graph->edges()[k].i, j = w.graph->edges()[k].j;
    const double rho = w.rho[k], coupling = model.couplings()[k];
    const double c = stationary_edge_covariance(m[i], m[j], coupling, rho);
    const double chi = m[i] * m[j] + c;
    double sum_a_ln = 0.0, sum_b_ln = 0.0;
    double saa = 0.0, sbb = 0.0, sab = 0.0, sad = 0.0, sbd = 0.0, sdd = 0.0;
    double hc = 0.0;
    for (const auto& s : kSigns) {
      const double si = s[0], sj = s[1];
      const double q =
          std::max(0.25 * (1.0 + m[i] * si + m[j] * sj + chi * si * sj), 1e-16);
      const double a = 0.25 * si * (1.0 + m[j] * sj);
      const double b = 0.25 * sj * (1.0 + m[i] * si);
      const double d = 0.25 * si * sj;
      const double lq = std::log(q);
      sum_a_ln += a * lq;
      sum_b_ln += b * lq;
      hc -= d * lq;
      saa += a * a / q;
      sbb += b * b / q;
      sab += a * b / q;
      sad += a * d / q;
      sbd += b * d / q;
      sdd += d * d / q;
    }
    gh.grad[i] += -coupling * m[j] + rho * sum_a_ln;
    gh.grad[j] += -coupling * m[i] + rho * sum_b_ln;
    const double f_mm_ij = -coupling + rho * sab - rho * hc;
    gh.hess(i, i) += rho * saa;
    gh.hess(j, j) += rho * sbb;
    gh.hess(i, j) += f_mm_ij;
    gh.hess(j, i) += f_mm_ij;
    const double fcc = std::max(rho * sdd, 1e-300);
    const double fmc_i = rho * sad, fmc_j = rho * sbd;
    gh.hess(i, i) -= fmc_i * fmc_i / fcc;
    gh.hess(j, j) -= fmc_j * fmc_j / fcc;
    gh.hess(i, j) -= fmc_i * fmc_j / fcc;
    gh.hess(j, i) -= fmc_i * fmc_j / fcc;
  }
  return gh;
}

StageResult newton_minimize(const Workspace& w, std::vector<double> m,
                            double tol, int budget) {
  StageResult out;
  for (double& x : m) x = clamp_unit(x, kMeanBox);
  double fval = free_energy_value(w, m);
  for (int it = 0; it < budget; ++it) {
    out.iterations = it + 1;
    const GradHess gh = free_energy_grad_hess(w, m);
    if (gh.grad.lpNorm<Eigen::Infinity>() < 1e-13) break;
    Eigen::VectorXd step = gh.hess.ldlt().solve(-gh.grad);
    if (!step.allFinite() || step.dot(gh.grad) >= 0.0) step = -gh.grad;
    const double slope = gh.grad.dot(step);
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      std::vector<double> trial(m);
      for (int i = 0; i < w.n; ++i)
        trial[i] = clamp_unit(m[i] + alpha * step[i], kMeanBox);
      const double ftrial = free_energy_value(w, trial);
      if (ftrial <= fval + 1e-4 * alpha * slope) {
        m = std::move(trial);
        fval = ftrial;
        accepted = true;
        break;
      }
      alpha /= 2.0;
    }
    if (!accepted) break;
  }
  out.m = m;
  out.residual = residual_inf(w, m);
  out.converged = out.residual <= tol;
  return out;
}

// ---- Stage 3: Newton iteration on the residual map -------------------------

// f and its partials in both mean arguments, with guards that keep the
// derivatives finite when the discriminant grazes zero.
void f_aux_derivs(double m1, double m2, double t, double* f, double* df1,
                  double* df2) {
  const double one_mt2 = 1.0 - t * t;
  double disc = one_mt2 * one_mt2 - 4.0 * t * (m1 - m2 * t) * (m2 - m1 * t);
  disc = std::max(disc, 0.0);
  const double root = std::sqrt(disc);
  const double sq = std::max(root, 1e-12);
  const double den = std::max(one_mt2 + root, 1e-300);
  *f = 2.0 * (m1 - m2 * t) / den;
  const double dd1 = -4.0 * t * (m2 * (1.0 + t * t) - 2.0 * t * m1);
  const double dd2 = -4.0 * t * (m1 * (1.0 + t * t) - 2.0 * t * m2);
  *df1 = 2.0 / den - (*f) * dd1 / (2.0 * sq * den);
  *df2 = -2.0 * t / den - (*f) * dd2 / (2.0 * sq * den);
}

StageResult newton_residual(const Workspace& w, std::vector<double> m,
                            double tol, int budget) {
  StageResult out;
  for (double& x : m) x = clamp_unit(x, kMeanBox);
  std::vector<double> r(w.n);
  Eigen::MatrixXd jac(w.n, w.n);

  auto evaluate = [&](const std::vector<double>& mm, std::vector<double>* rr,
                      Eigen::MatrixXd* jj) {
    if (jj) jj->setZero();
    double res = 0.0;
    for (int i = 0; i < w.n; ++i) {
      double th = w.model->biases()[i];
      for (const auto& [j, k] : w.graph->neighbors(i)) {
        double f, df1, df2;
        f_aux_derivs(mm[j], mm[i], w.t_tilde[k], &f, &df1, &df2);
        const double u = clamp_unit(w.t_tilde[k] * f, kAtanhClip);
        th += w.rho[k] * std::atanh(u);
        if (jj) {
          const double denom = std::max(1.0 - u * u, 1e-16);
          (*jj)(i, j) -= w.rho[k] * w.t_tilde[k] * df1 / denom;
          (*jj)(i, i) -= w.rho[k] * w.t_tilde[k] * df2 / denom;
        }
      }
      const double tanh_th = std::tanh(th);
      (*rr)[i] = mm[i] - tanh_th;
      res = std::max(res, std::abs((*rr)[i]));
      if (jj) {
        const double sech2 = 1.0 - tanh_th * tanh_th;
        for (int l = 0; l < w.n; ++l) (*jj)(i, l) *= sech2;
        (*jj)(i, i) += 1.0;
      }
    }
    return res;
  };

  double res = evaluate(m, &r, nullptr);
  out.m = m;
  out.residual = res;
  for (int it = 0; it < budget && res > tol; ++it) {
    out.iterations = it + 1;
    evaluate(m, &r, &jac);
    Eigen::Map<const Eigen::VectorXd> rv(r.data(), w.n);
    Eigen::VectorXd step = jac.partialPivLu().solve(-rv);
    if (!step.allFinite()) break;
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      std::vector<double> trial(m);
      for (int i = 0; i < w.n; ++i)
        trial[i] = clamp_unit(m[i] + alpha * step[i], kMeanBox);
      const double rtrial = evaluate(trial, &r, nullptr);
      if (rtrial < res) {
        m = std::move(trial);
        res = rtrial;
        accepted = true;
        break;
      }
      alpha /= 2.0;
    }
    if (!accepted) break;
    if (res < out.residual) {
      out.residual = res;
      out.m = m;
    }
  }
  return out;
}

}  // namespace

double f_aux(double m1, double m2, double t) {
  if (!(std::abs(m1) <= 1.0) || !(std::abs(m2) <= 1.0))
    throw DomainError("f_aux: means must lie in [-1, 1]");
  if (!(std::abs(t) < 1.0)) throw DomainError("f_aux: |t| must be < 1");
  const double one_mt2 = 1.0 - t * t;
  double disc = one_mt2 * one_mt2 - 4.0 * t * (m1 - m2 * t) * (m2 - m1 * t);
  if (disc < -1e-12) throw DomainError("f_aux: negative discriminant");
  disc = std::max(disc, 0.0);
  const double den = one_mt2 + std::sqrt(disc);
  if (den < 1e-300) throw DomainError("f_aux: degenerate denominator");
  return 2.0 * (m1 - m2 * t) / den;
}

double stationary_edge_covariance(double m_i, double m_j, double coupling,
                                  double rho) {
  if (!(std::abs(m_i) < 1.0) || !(std::abs(m_j) < 1.0))
    throw DomainError("stationary_edge_covariance: means must lie in (-1, 1)");
  if (!(rho > 0.0) || !(rho <= 1.0))
    throw ConfigError("stationary_edge_covariance: rho must lie in (0, 1]");
  if (!std::isfinite(coupling))
    throw DomainError("stationary_edge_covariance: non-finite coupling");
  const double t = std::tanh(coupling / rho);
  const double w = (1.0 - m_i * m_i) * (1.0 - m_j * m_j);
  if (std::abs(t) < 1e-12) return w * t;  // series limit; error O(t^3)
  const double g = (1.0 + t * t) / (2.0 * t) - m_i * m_j;
  // Exact rearrangement of g^2 - w; the naive difference cancels
  // catastrophically as |t| -> 1.
  const double half_ratio = (1.0 - t * t) / (2.0 * t);
  double radicand = half_ratio * half_ratio + (m_i - m_j) * (m_i - m_j) -
                    m_i * m_j * (1.0 - t) * (1.0 - t) / t;
  if (radicand < -1e-12)
    throw DomainError("stationary_edge_covariance: no feasible branch");
  radicand = std::max(radicand, 0.0);
  const double s = g >= 0.0 ? 1.0 : -1.0;
  const double den = g + s * std::sqrt(radicand);
  if (std::abs(den) < 1e-300)
    throw DomainError("stationary_edge_covariance: degenerate root");
  return w / den;
}

std::vector<double> solve_self_consistency(const IsingModel& model,
                                           const EdgeAppearance& rho,
                                           const std::vector<double>& init,
                                           double tol, int max_iter) {
  check_model(model);
  rho.validate(model.graph());
  if (!(tol > 0.0)) throw ConfigError("solve_self_consistency: tol must be > 0");
  if (max_iter < 1)
    throw ConfigError("solve_self_consistency: max_iter must be >= 1");
  if (static_cast<int>(init.size()) != model.graph().vertex_count())
    throw SizeError("solve_self_consistency: init size mismatch");
  for (double x : init)
    if (!(std::abs(x) < 1.0))
      throw DomainError("solve_self_consistency: init entries must lie in (-1, 1)");

  const Workspace w = make_workspace(model, rho);

  StageResult gs = gauss_seidel(w, init, tol, max_iter);
  if (gs.converged) return gs.m;

  StageResult best = gs;
  int remaining = max_iter - gs.iterations;

  if (remaining > 0) {
    StageResult nm = newton_minimize(w, std::vector<double>(w.n, 0.0), tol,
                                     std::min(remaining, 200));
    remaining -= nm.iterations;
    if (nm.converged) return nm.m;
    if (nm.residual < best.residual) best = nm;

    if (remaining > 0) {
      StageResult pol =
          newton_residual(w, best.m, tol, std::min(remaining, 100));
      if (pol.residual < best.residual) best = pol;
      if (pol.residual <= tol) return pol.m;
    }
  }

  if (best.residual <= tol) return best.m;
  throw ConvergenceError("solve_self_consistency: residual " +
                             std::to_string(best.residual) +
                             " above tolerance " + std::to_string(tol),
                         best.residual, max_iter);
}

std::vector<double> solve_self_consistency(const IsingModel& model,
                                           const EdgeAppearance& rho,
                                           double tol, int max_iter) {
  return solve_self_consistency(
      model, rho, std::vector<double>(model.graph().vertex_count(), 0.0), tol,
      max_iter);
}

double self_consistency_residual(const IsingModel& model,
                                 const EdgeAppearance& rho,
                                 const std::vector<double>& means) {
  check_model(model);
  rho.validate(model.graph());
  if (static_cast<int>(means.size()) != model.graph().vertex_count())
    throw SizeError("self_consistency_residual: means size mismatch");
  const Workspace w = make_workspace(model, rho);
  return residual_inf(w, means);
}

EdgeMessages edge_messages(const IsingModel& model, const EdgeAppearance& rho,
                           const std::vector<double>& means) {
  check_model(model);
  rho.validate(model.graph());
  if (static_cast<int>(means.size()) != model.graph().vertex_count())
    throw SizeError("edge_messages: means size mismatch");
  EdgeMessages msg;
  const int ne = model.graph().edge_count();
  msg.t_tilde.resize(ne);
  msg.f_forward.resize(ne);
  msg.f_backward.resize(ne);
  for (int k = 0; k < ne; ++k) {
    const int i = model.graph().edges()[k].i, j = model.graph().edges()[k].j;
    msg.t_tilde[k] = std::tanh(model.couplings()[k] / rho.rho[k]);
    msg.f_forward[k] = f_aux(means[i], means[j], msg.t_tilde[k]);
    msg.f_backward[k] = f_aux(means[j], means[i], msg.t_tilde[k]);
  }
  return msg;
}

FreeEnergyBreakdown trw_free_energy(const Pseudomarginals& q,
                                    const IsingModel& model,
                                    const EdgeAppearance& rho) {
  check_model(model);
  rho.validate(model.graph());
  const Graph& g = model.graph();
  if (static_cast<int>(q.means.size()) != g.vertex_count())
    throw SizeError("trw_free_energy: means size mismatch");
  if (static_cast<int>(q.edge_covariances.size()) != g.edge_count())
    throw SizeError("trw_free_energy: edge covariance size mismatch");
  for (double m : q.means)
    if (!(std::abs(m) <= 1.0))
      throw DomainError("trw_free_energy: means must lie in [-1, 1]");

  std::vector<double> deficit(g.vertex_count(), 1.0);
  for (int k = 0; k < g.edge_count(); ++k) {
    deficit[g.edges()[k].i] -= rho.rho[k];
    deficit[g.edges()[k].j] -= rho.rho[k];
  }

  FreeEnergyBreakdown out;
  for (int i = 0; i < g.vertex_count(); ++i) {
    out.energy -= model.biases()[i] * q.means[i];
    double h1 = 0.0;
    for (int s = -1; s <= 1; s += 2) {
      const double p = (1.0 + s * q.means[i]) / 2.0;
      if (p > 0.0) h1 -= p * std::log(p);
    }
    out.entropy += deficit[i] * h1;
  }
  for (int k = 0; k < g.edge_count(); ++k) {
    const int i = g.edges()[k].i, j = g.edges()[k].j;
    const double chi = q.means[i] * q.means[j] + q.edge_covariances[k];
    out.energy -= model.couplings()[k] * chi;
    double h2 = 0.0;
    for (const auto& s : kSigns) {
      double p = 0.25 * (1.0 + q.means[i] * s[0] + q.means[j] * s[1] +
                         chi * s[0] * s[1]);
      if (p < -1e-12)
        throw DomainError("trw_free_energy: pair probability out of range");
      p = std::max(p, 0.0);
      if (p > 0.0) h2 -= p * std::log(p);
    }
    out.entropy += rho.rho[k] * h2;
  }
  out.total = out.energy - out.entropy;
  return out;
}

Pseudomarginals stationary_pseudomarginals(const IsingModel& model,
                                           const EdgeAppearance& rho,
                                           double tol) {
  Pseudomarginals q;
  q.means = solve_self_consistency(model, rho, tol);
  q.edge_covariances.resize(model.graph().edge_count());
  for (int k = 0; k < model.graph().edge_count(); ++k) {
    const int i = model.graph().edges()[k].i, j = model.graph().edges()[k].j;
    q.edge_covariances[k] = stationary_edge_covariance(
        q.means[i], q.means[j], model.couplings()[k], rho.rho[k]);
  }
  return q;
}

double trw_log_partition(const IsingModel& model, const EdgeAppearance& rho,
                         double tol) {
  check_model(model);
  if (!model.graph().connected())
    throw DomainError("trw_log_partition: graph must be connected");
  const Pseudomarginals q = stationary_pseudomarginals(model, rho, tol);
  return -trw_free_energy(q, model, rho).total;
}

TrwMoments trw_pseudo_moments(const IsingModel& model,
                              const EdgeAppearance& rho, double tol) {
  const Pseudomarginals q = stationary_pseudomarginals(model, rho, tol);
  TrwMoments out;
  out.means = q.means;
  out.pair_moments.resize(model.graph().edge_count());
  for (int k = 0; k < model.graph().edge_count(); ++k) {
    const int i = model.graph().edges()[k].i, j = model.graph().edges()[k].j;
    out.pair_moments[k] = q.means[i] * q.means[j] + q.edge_covariances[k];
  }
  return out;
}

}  // namespace ising
