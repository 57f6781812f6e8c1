#pragma once
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace epimeter {

// Two-term scaling law L(N, D) = E + (N0/N)^alpha + (D0/D)^beta, in nats/token.
// All quantities in this module are nats; callers convert to bits at output.
struct ScalingLawParams {
  double E = 0.0;      // irreducible loss, nats/token
  double alpha = 0.0;  // parameter-count exponent
  double beta = 0.0;   // data exponent
  double N0 = 0.0;     // parameter scale
  double D0 = 0.0;     // token scale
  void validate() const;  // 0<alpha<1, 0<beta<1, E,N0,D0 > 0
};

// Compute-centric form: L*(C) = E + (C0/C)^gamma, N*(C) = (C/C_hat)^delta_exp.
struct ComputeCentricParams {
  double gamma = 0.0;      // loss-vs-compute exponent
  double delta_exp = 0.0;  // model-size-vs-compute exponent
  double C0 = 0.0;         // loss compute scale
  double C_hat = 0.0;      // model-size compute scale
  double E = 0.0;          // irreducible loss carried through conversion
  void validate() const;  // 0<delta_exp<1, gamma>0, scales>0
};

// Embedding-parameter correction N = N_e + omega * N_e^(1/3),
// omega = (vocab + ctx_len) * (aspect/12)^(1/3).
struct EmbeddingCorrection {
  double vocab = 0.0;
  double ctx_len = 0.0;
  double aspect = 12.0;  // width/depth aspect ratio A
  double omega() const;
  void validate() const;  // aspect>0, vocab/ctx_len >= 0
};

// Rescaled coordinates: n = N/N0, d = D/D0, delta = |test|/D0, t = T/(2*N0*D0).
// On the compute frontier t = n*(3d + delta).
struct NaturalUnits {
  double n = 0.0;
  double d = 0.0;
  double delta = 0.0;
  double t = 0.0;
};
NaturalUnits to_natural(const ScalingLawParams& p, double params, double train_tokens,
                        double test_tokens, double total_ops);
double natural_compute(const NaturalUnits& u);  // n*(3d + delta)

// L(N, D); strictly decreasing in each argument.
double loss(const ScalingLawParams& p, double params, double train_tokens);

// Closed-form prequential model nats, large-D regime: beta/(1-beta) * D0 * d^(1-beta).
double preq_closed_form(const ScalingLawParams& p, double train_tokens);

// Compute-optimal allocation under t = n*(3d + delta): the unique root in (0, delta)
// of beta*d^(-beta-1)*(delta-d) = 3*alpha*delta*t^(-alpha)*(3d+delta)^(alpha-1).
struct OptimalAlloc {
  double d_star = 0.0;
  double n_star = 0.0;  // t / (3*d_star + delta)
};
OptimalAlloc optimal_d(const ScalingLawParams& p, double delta, double t);

// Infinite-compute limits and small-compute exponents.
struct Asymptotics {
  double S_inf = 0.0;                  // beta/(1-beta) * D0^beta * Dtest^(1-beta)
  double H_inf = 0.0;                  // Dtest*E + D0^beta * Dtest^(1-beta)
  double epiplexity_exponent = 0.0;    // alpha*(1-beta)/(beta+1): S_T ~ T^x
  double entropy_excess_exponent = 0.0;  // alpha*beta/(beta+1): H_T - Dtest*E ~ T^-x
};
Asymptotics asymptotics(const ScalingLawParams& p, double test_tokens);

// Two-part decomposition along the compute-optimal path at natural budget t.
struct PathPoint {
  double t = 0.0;    // natural compute
  double ops = 0.0;  // absolute compute, 2*N0*D0*t
  double d_star = 0.0;
  double n_star = 0.0;
  double model_nats = 0.0;  // S_T
  double data_nats = 0.0;   // H_T
  double total_nats = 0.0;
};
PathPoint decompose_at(const ScalingLawParams& p, double delta, double t);
std::vector<PathPoint> optimal_path(const ScalingLawParams& p, double delta,
                                    const std::vector<double>& t_grid);

// One fit input: total parameter count, training tokens, observed loss (nats/token).
struct LossSample {
  double params = 0.0;
  double tokens = 0.0;
  double loss_nats = 0.0;
};

// One pre-correction point: compute and parameter count exclude embeddings.
struct SourcePoint {
  double compute = 0.0;  // C_e
  double params = 0.0;   // N_e
  double loss_nats = 0.0;
};

// Generate source points whose embedding-corrected refit recovers `corrected_law`:
// a grid_side x grid_side grid over [N0, 1e3*N0] x [D0, 1e3*D0] (6 decades of
// compute), with N mapped back to N_e by inverting N = N_e + omega*N_e^(1/3).
std::vector<SourcePoint> embedding_source_points(const ScalingLawParams& corrected_law,
                                                 const EmbeddingCorrection& corr,
                                                 int grid_side = 20);

// Apply the correction to each point and refit (E, alpha, beta, N0, D0) by
// log-space least squares. C = C_e * N/N_e; D = C/(6N) is unchanged.
ScalingLawParams correct_embeddings(const std::vector<SourcePoint>& points,
                                    const EmbeddingCorrection& corr);

// alpha = gamma/delta_exp, beta = gamma/(1-delta_exp),
// D0 = (C_hat/6) * N0^(alpha/beta) * (beta/alpha)^(-1/beta).
ScalingLawParams convert_compute_centric(const ComputeCentricParams& q, double n0_anchor);
// Inverse of the above (C0 implied by the compute-optimal path).
ComputeCentricParams to_compute_centric(const ScalingLawParams& p);

// Unconstrained compute-optimal pretraining split of C = 6*N*D.
struct ComputeAlloc {
  double params = 0.0;
  double tokens = 0.0;
};
ComputeAlloc compute_optimal_alloc(const ScalingLawParams& p, double compute);
double optimal_loss_at_compute(const ScalingLawParams& p, double compute);
double compute_centric_loss(const ComputeCentricParams& q, double compute);

// Numerical monotonicity checks over the supplied grids.
struct MonotonicityReport {
  bool d_star_increasing = true;          // d*(t) strictly increasing
  bool n_star_increasing = true;          // n*(t) strictly increasing
  bool path_entropy_nonincreasing = true;  // H_T along the optimal path
  bool limits_monotone = true;  // S_inf nondecreasing, H_inf per token nonincreasing
  std::string first_violation;  // empty when all pass
  bool all_pass() const;
};
MonotonicityReport monotonicity_report(const ScalingLawParams& p, double delta,
                                       const std::vector<double>& t_grid,
                                       const std::vector<double>& test_grid);

// Corrected parameter table (image/video/language rows).
const std::vector<std::pair<std::string, ScalingLawParams>>& builtin_scaling_table();
ScalingLawParams table_row(const std::string& name);

nlohmann::json scaling_report_json(const ScalingLawParams& p, double delta,
                                   const std::vector<double>& t_grid);
void path_to_csv(const std::vector<PathPoint>& path, std::ostream& os);

}  // namespace epimeter
