#include "ising/inverse.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "ising/errors.hpp"

namespace ising {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void check_stats(const DataStatistics& stats) {
  const int n = static_cast<int>(stats.means.size());
  if (n == 0) throw SizeError("invert: empty statistics");
  if (stats.covariance.rows() != n || stats.covariance.cols() != n)
    throw SizeError("invert: covariance shape does not match means");
  if (!stats.means.allFinite() || !stats.covariance.allFinite())
    throw DomainError("invert: non-finite statistics");
  for (int i = 0; i < n; ++i)
    if (std::abs(stats.means[i]) > 1.0)
      throw DomainError("invert: mean outside [-1, 1]");
}

// Spectral pseudo-inverse: stable for the near-singular covariances that
// strongly coupled models produce. Modes below n * eps * |lambda|_max are
// dropped rather than amplified.
Eigen::MatrixXd covariance_inverse(const Eigen::MatrixXd& c,
                                   InverseDiagnostics* diag) {
  const int n = static_cast<int>(c.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  if (es.info() != Eigen::Success)
    throw LinAlgError("invert: eigendecomposition of covariance failed");
  const Eigen::VectorXd& lambda = es.eigenvalues();
  const double lambda_max = lambda.cwiseAbs().maxCoeff();
  if (!(lambda_max > 0.0))
    throw LinAlgError("invert: covariance is identically zero");
  const double cutoff = n * 2.22e-16 * lambda_max;
  Eigen::VectorXd inv_lambda(n);
  int dropped = 0;
  double min_kept = lambda_max;
  for (int i = 0; i < n; ++i) {
    if (std::abs(lambda[i]) > cutoff) {
      inv_lambda[i] = 1.0 / lambda[i];
      min_kept = std::min(min_kept, std::abs(lambda[i]));
    } else {
      inv_lambda[i] = 0.0;
      ++dropped;
    }
  }
  diag->condition_estimate = lambda_max / min_kept;
  if (dropped > 0)
    diag->warnings.push_back("covariance numerically singular: dropped " +
                             std::to_string(dropped) + " of " +
                             std::to_string(n) + " modes");
  else if (diag->condition_estimate > 1e12)
    diag->warnings.push_back("covariance ill-conditioned: estimate " +
                             std::to_string(diag->condition_estimate));
  return es.eigenvectors() * inv_lambda.asDiagonal() *
         es.eigenvectors().transpose();
}

// Quarter log-ratio from the reconstructed pair distribution; nullopt if
// any of the four probabilities is nonpositive.
std::optional<double> ip_pair(double mi, double mj, double cij) {
  const double chi = cij + mi * mj;
  double q[4];
  int idx = 0;
  for (int si = 1; si >= -1; si -= 2)
    for (int sj = 1; sj >= -1; sj -= 2)
      q[idx++] = 0.25 * (1.0 + mi * si + mj * sj + chi * si * sj);
  if (q[0] <= 0.0 || q[1] <= 0.0 || q[2] <= 0.0 || q[3] <= 0.0)
    return std::nullopt;
  const double j = 0.25 * std::log(q[0] * q[3] / (q[1] * q[2]));
  if (!std::isfinite(j)) return std::nullopt;
  return j;
}

std::optional<double> trw_pair(double mi, double mj, double cinv_ij,
                               double rho) {
  const double x = cinv_ij / rho;
  if (std::abs(x) < 1e-12) return 0.0;  // continuous limit of the formula
  const double w = (1.0 - mi * mi) * (1.0 - mj * mj);
  const double p = mi * mj;
  const double d_tilde = 1.0 + 4.0 * w * x * x;
  const double sqrt_d = std::sqrt(d_tilde);
  double a;
  if (std::abs(x) < 1e-6) {
    // The direct form below subtracts sqrt(inner) ~ sqrt_d and loses the
    // O(x) answer to rounding once |x| ~ sqrt(eps). Equivalent rearrangement
    // with inner = d_tilde (1 - v): every term is a product carrying the
    // factor x, so the small-x limit a = x + O(x^2) comes out to full
    // precision. inner >= 0 always holds here (sqrt_d >= 1 >> |x|).
    const double v = 4.0 * x * (p * sqrt_d + x * (1.0 - p * p)) / d_tilde;
    const double root = std::sqrt(1.0 - v);
    a = (p * sqrt_d * v / (1.0 + root) + 2.0 * x * (1.0 - p * p)) /
        (sqrt_d * (1.0 + root));
  } else {
    const double inner =
        (sqrt_d - 2.0 * p * x) * (sqrt_d - 2.0 * p * x) - 4.0 * x * x;
    if (inner < 0.0) return std::nullopt;
    a = (sqrt_d - std::sqrt(inner)) / (2.0 * x) - p;
  }
  if (!(std::abs(a) < 1.0)) return std::nullopt;
  const double j = -rho * std::atanh(a);
  if (!std::isfinite(j)) return std::nullopt;
  return j;
}

std::optional<double> sm_pair(double mi, double mj, double cij,
                              double cinv_ij) {
  const auto ip = ip_pair(mi, mj, cij);
  if (!ip) return std::nullopt;
  const double den = (1.0 - mi * mi) * (1.0 - mj * mj) - cij * cij;
  if (den == 0.0) return std::nullopt;
  const double j = -cinv_ij + *ip - cij / den;
  if (!std::isfinite(j)) return std::nullopt;
  return j;
}

InferredCouplings invert_impl(const DataStatistics& stats, InverseMethod method,
                              const Eigen::MatrixXd* rho_pairs) {
  check_stats(stats);
  const int n = static_cast<int>(stats.means.size());

  InferredCouplings out;
  out.method = method;
  out.couplings = Eigen::MatrixXd::Zero(n, n);

  Eigen::MatrixXd cinv;
  if (method != InverseMethod::ip)
    cinv = covariance_inverse(stats.covariance, &out.diagnostics);

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double mi = stats.means[i], mj = stats.means[j];
      const double cij = stats.covariance(i, j);
      std::optional<double> value;
      switch (method) {
        case InverseMethod::ip:
          value = ip_pair(mi, mj, cij);
          break;
        case InverseMethod::bethe:
          value = trw_pair(mi, mj, cinv(i, j), 1.0);
          break;
        case InverseMethod::trw:
          value = trw_pair(mi, mj, cinv(i, j), (*rho_pairs)(i, j));
          break;
        case InverseMethod::sm:
          value = sm_pair(mi, mj, cij, cinv(i, j));
          break;
      }
      if (value) {
        out.couplings(i, j) = *value;
        out.couplings(j, i) = *value;
      } else {
        out.couplings(i, j) = kNan;
        out.couplings(j, i) = kNan;
        out.diagnostics.failed_pairs.emplace_back(i, j);
      }
    }
  }
  return out;
}

Eigen::MatrixXd check_rho_pairs(const Eigen::MatrixXd& rho_pairs, int n) {
  if (rho_pairs.rows() != n || rho_pairs.cols() != n)
    throw SizeError("invert_trw: rho_pairs shape does not match statistics");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double r = rho_pairs(i, j);
      if (!(r > 0.0) || !(r <= 1.0))
        throw ConfigError("invert_trw: rho entries must lie in (0, 1]");
      if (rho_pairs(j, i) != r)
        throw ConfigError("invert_trw: rho_pairs must be symmetric");
    }
  return rho_pairs;
}

}  // namespace

std::string method_name(InverseMethod method) {
  switch (method) {
    case InverseMethod::ip: return "ip";
    case InverseMethod::bethe: return "bethe";
    case InverseMethod::sm: return "sm";
    case InverseMethod::trw: return "trw";
  }
  throw ConfigError("unknown inverse method");
}

InverseMethod method_from_name(const std::string& name) {
  if (name == "ip") return InverseMethod::ip;
  if (name == "bethe") return InverseMethod::bethe;
  if (name == "sm") return InverseMethod::sm;
  if (name == "trw") return InverseMethod::trw;
  throw ConfigError("unknown inverse method '" + name + "'");
}

InferredCouplings invert_ip(const DataStatistics& stats) {
  return invert_impl(stats, InverseMethod::ip, nullptr);
}

InferredCouplings invert_trw(const DataStatistics& stats,
                             const Eigen::MatrixXd& rho_pairs) {
  check_stats(stats);
  const Eigen::MatrixXd rho =
      check_rho_pairs(rho_pairs, static_cast<int>(stats.means.size()));
  return invert_impl(stats, InverseMethod::trw, &rho);
}

InferredCouplings invert_trw(const DataStatistics& stats, const Graph& graph,
                             const EdgeAppearance& rho) {
  check_stats(stats);
  rho.validate(graph);
  const int n = graph.vertex_count();
  if (static_cast<int>(stats.means.size()) != n)
    throw SizeError("invert_trw: statistics size does not match graph");
  Eigen::MatrixXd rho_pairs = Eigen::MatrixXd::Ones(n, n);
  for (int k = 0; k < graph.edge_count(); ++k) {
    const Edge& e = graph.edges()[k];
    rho_pairs(e.i, e.j) = rho.rho[k];
    rho_pairs(e.j, e.i) = rho.rho[k];
  }
  return invert_impl(stats, InverseMethod::trw, &rho_pairs);
}

InferredCouplings invert_bethe(const DataStatistics& stats) {
  return invert_impl(stats, InverseMethod::bethe, nullptr);
}

InferredCouplings invert_sm(const DataStatistics& stats) {
  return invert_impl(stats, InverseMethod::sm, nullptr);
}

std::map<InverseMethod, InferredCouplings> invert_all(const DataStatistics& stats,
                                                      const Graph& graph,
                                                      const EdgeAppearance& rho) {
  std::map<InverseMethod, InferredCouplings> out;
  out.emplace(InverseMethod::ip, invert_ip(stats));
  out.emplace(InverseMethod::bethe, invert_bethe(stats));
  out.emplace(InverseMethod::sm, invert_sm(stats));
  out.emplace(InverseMethod::trw, invert_trw(stats, graph, rho));
  return out;
}

}  // namespace ising
