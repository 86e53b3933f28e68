#pragma once

#include <vector>

#include "ising/model.hpp"

namespace ising {

// Site means plus per-edge connected covariances, indexed like graph.edges.
struct Pseudomarginals {
  std::vector<double> means;
  std::vector<double> edge_covariances;
};

// Per-edge reweighted couplings and the auxiliary cavity factors evaluated
// at a given mean vector. For edge k = (i, j): f_forward[k] = f(m_i, m_j,
// t_tilde[k]) enters the update of m_j, f_backward[k] = f(m_j, m_i,
// t_tilde[k]) enters the update of m_i.
struct EdgeMessages {
  std::vector<double> t_tilde;
  std::vector<double> f_forward;
  std::vector<double> f_backward;
};

struct FreeEnergyBreakdown {
  double energy = 0.0;
  double entropy = 0.0;
  double total = 0.0;  // always energy - entropy
};

// Stationary site means and per-edge pair moments m_i m_j + c_ij.
struct TrwMoments {
  std::vector<double> means;
  std::vector<double> pair_moments;
};

// Auxiliary cavity factor f(m1, m2, t): the smaller-magnitude root of
// t f^2 - [(1 - t^2) / (m1 - m2 t)] f ... written in the rationalized form
// 2 (m1 - m2 t) / (1 - t^2 + sqrt(disc)) that stays finite as m1 -> m2 t.
// Throws DomainError when the discriminant is genuinely negative.
double f_aux(double m1, double m2, double t);

// Stationary connected covariance c*(m_i, m_j) of one reweighted edge with
// coupling `coupling` and appearance probability rho, i.e. the root of
// dF_edge/dc = 0 on the branch where all four pair probabilities stay in
// [0, 1]. Continuous with tanh(coupling / rho) * (1-m_i^2)(1-m_j^2)-type
// behavior as the means vanish.
double stationary_edge_covariance(double m_i, double m_j, double coupling,
                                  double rho);

// Solves the reweighted self-consistency conditions
//   m_i = tanh[h_i + sum_k rho_k artanh(t_k f(m_j, m_i, t_k))]
// to |residual|_inf <= tol. Damped Gauss-Seidel iteration first; if that
// stalls, direct minimization of the reweighted free energy by Newton's
// method followed by a Newton polish of the residual map. Throws
// ConvergenceError (carrying the best residual reached) if no stage gets
// below tol within the overall max_iter budget.
std::vector<double> solve_self_consistency(const IsingModel& model,
                                           const EdgeAppearance& rho,
                                           const std::vector<double>& init,
                                           double tol = 1e-10,
                                           int max_iter = 10000);
std::vector<double> solve_self_consistency(const IsingModel& model,
                                           const EdgeAppearance& rho,
                                           double tol = 1e-10,
                                           int max_iter = 10000);

// Max-norm of the self-consistency residual at a given mean vector.
double self_consistency_residual(const IsingModel& model,
                                 const EdgeAppearance& rho,
                                 const std::vector<double>& means);

EdgeMessages edge_messages(const IsingModel& model, const EdgeAppearance& rho,
                           const std::vector<double>& means);

// Reweighted variational free energy of a pseudomarginal assignment:
// energy term, tree-combined entropy, and their difference. The edge
// entropies use the four pair probabilities q(s_i, s_j); a q of zero
// contributes zero (0 ln 0 = 0), a genuinely negative q is a domain error.
FreeEnergyBreakdown trw_free_energy(const Pseudomarginals& q,
                                    const IsingModel& model,
                                    const EdgeAppearance& rho);

// Solves the self-consistency conditions and pairs the resulting means
// with their stationary edge covariances.
Pseudomarginals stationary_pseudomarginals(const IsingModel& model,
                                           const EdgeAppearance& rho,
                                           double tol = 1e-10);

// -F at the stationary pseudomarginals: an upper bound on the true log
// partition function whenever rho is a valid spanning-tree edge-appearance
// vector.
double trw_log_partition(const IsingModel& model, const EdgeAppearance& rho,
                         double tol = 1e-10);

TrwMoments trw_pseudo_moments(const IsingModel& model,
                              const EdgeAppearance& rho, double tol = 1e-10);

}  // namespace ising
