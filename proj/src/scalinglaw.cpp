#include "epimeter/scalinglaw.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "epimeter/error.hpp"
#include "epimeter/fit.hpp"

namespace epimeter {

void ScalingLawParams::validate() const {
  if (!(E > 0.0) || !(N0 > 0.0) || !(D0 > 0.0))
    throw std::invalid_argument("scaling law needs E, N0, D0 > 0");
  if (!(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("scaling law exponents must lie in (0,1)");
}

void ComputeCentricParams::validate() const {
  if (!(delta_exp > 0.0 && delta_exp < 1.0))
    throw std::invalid_argument("compute-centric delta_exp must lie in (0,1)");
  if (!(gamma > 0.0)) throw std::invalid_argument("compute-centric gamma must be positive");
  if (!(C0 > 0.0) || !(C_hat > 0.0) || !(E > 0.0))
    throw std::invalid_argument("compute-centric scales and E must be positive");
}

double EmbeddingCorrection::omega() const {
  return (vocab + ctx_len) * std::cbrt(aspect / 12.0);
}

void EmbeddingCorrection::validate() const {
  if (!(aspect > 0.0)) throw std::invalid_argument("embedding correction needs aspect > 0");
  if (vocab < 0.0 || ctx_len < 0.0)
    throw std::invalid_argument("embedding correction needs nonnegative vocab and ctx_len");
}

NaturalUnits to_natural(const ScalingLawParams& p, double params, double train_tokens,
                        double test_tokens, double total_ops) {
  p.validate();
  if (!(params > 0.0) || !(train_tokens > 0.0) || !(test_tokens > 0.0) || !(total_ops > 0.0))
    throw std::invalid_argument("natural units need positive N, D, test tokens, and ops");
  return {params / p.N0, train_tokens / p.D0, test_tokens / p.D0,
          total_ops / (2.0 * p.N0 * p.D0)};
}

double natural_compute(const NaturalUnits& u) { return u.n * (3.0 * u.d + u.delta); }

double loss(const ScalingLawParams& p, double params, double train_tokens) {
  p.validate();
  if (!(params > 0.0) || !(train_tokens > 0.0))
    throw std::invalid_argument("loss needs positive N and D");
  return p.E + std::pow(p.N0 / params, p.alpha) + std::pow(p.D0 / train_tokens, p.beta);
}

double preq_closed_form(const ScalingLawParams& p, double train_tokens) {
  p.validate();
  if (!(p.beta < 1.0))
    throw std::invalid_argument("closed-form prequential bits need beta < 1");
  if (!(train_tokens > 0.0))
    throw std::invalid_argument("closed-form prequential bits need D > 0");
  const double d = train_tokens / p.D0;
  return p.beta / (1.0 - p.beta) * p.D0 * std::pow(d, 1.0 - p.beta);
}

namespace {

// Allocation residual g(d) = beta*d^(-beta-1)*(delta-d) - 3*alpha*delta*t^(-alpha)*(3d+delta)^(alpha-1).
// Positive below the optimum, negative above; the LHS/RHS ratio is strictly
// decreasing on (0, delta), so the root is unique.
double alloc_residual(const ScalingLawParams& p, double delta, double t, double d) {
  const double lhs = p.beta * std::pow(d, -p.beta - 1.0) * (delta - d);
  const double rhs =
      3.0 * p.alpha * delta * std::pow(t, -p.alpha) * std::pow(3.0 * d + delta, p.alpha - 1.0);
  return lhs - rhs;
}

}  // namespace

OptimalAlloc optimal_d(const ScalingLawParams& p, double delta, double t) {
  p.validate();
  if (!(delta > 0.0) || !(t > 0.0))
    throw std::invalid_argument("optimal allocation needs delta > 0 and t > 0");
  double lo = 1e-12 * delta;
  double hi = (1.0 - 1e-12) * delta;
  // Verify the bracket and that the residual changes sign exactly once.
  const int kScan = 64;
  double prev_d = lo, prev_g = alloc_residual(p, delta, t, lo);
  if (!(prev_g > 0.0)) {
    std::ostringstream os;
    os << "allocation root bracket failed: residual at d=" << lo << " is " << prev_g
       << " (delta=" << delta << ", t=" << t << ")";
    throw NumericError(os.str());
  }
  int sign_changes = 0;
  const double lratio = std::log(hi / lo);
  for (int i = 1; i <= kScan; ++i) {
    const double d = lo * std::exp(lratio * i / kScan);
    const double g = alloc_residual(p, delta, t, d);
    if ((prev_g > 0.0) != (g > 0.0)) {
      ++sign_changes;
      lo = prev_d;
      hi = d;
    }
    prev_d = d;
    prev_g = g;
  }
  if (sign_changes != 1) {
    std::ostringstream os;
    os << "allocation residual is not single-crossing: " << sign_changes
       << " sign changes on (0, delta) (delta=" << delta << ", t=" << t << ")";
    throw NumericError(os.str());
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (alloc_residual(p, delta, t, mid) > 0.0 ? lo : hi) = mid;
  }
  const double d_star = 0.5 * (lo + hi);
  return {d_star, t / (3.0 * d_star + delta)};
}

Asymptotics asymptotics(const ScalingLawParams& p, double test_tokens) {
  p.validate();
  if (!(test_tokens > 0.0)) throw std::invalid_argument("asymptotics need test tokens > 0");
  Asymptotics a;
  const double tail = std::pow(p.D0, p.beta) * std::pow(test_tokens, 1.0 - p.beta);
  a.S_inf = p.beta / (1.0 - p.beta) * tail;
  a.H_inf = test_tokens * p.E + tail;
  a.epiplexity_exponent = p.alpha * (1.0 - p.beta) / (p.beta + 1.0);
  a.entropy_excess_exponent = p.alpha * p.beta / (p.beta + 1.0);
  return a;
}

PathPoint decompose_at(const ScalingLawParams& p, double delta, double t) {
  const OptimalAlloc alloc = optimal_d(p, delta, t);
  PathPoint pt;
  pt.t = t;
  pt.ops = 2.0 * p.N0 * p.D0 * t;
  pt.d_star = alloc.d_star;
  pt.n_star = alloc.n_star;
  pt.model_nats = preq_closed_form(p, alloc.d_star * p.D0);
  pt.data_nats = delta * p.D0 * loss(p, alloc.n_star * p.N0, alloc.d_star * p.D0);
  pt.total_nats = pt.model_nats + pt.data_nats;
  return pt;
}

std::vector<PathPoint> optimal_path(const ScalingLawParams& p, double delta,
                                    const std::vector<double>& t_grid) {
  std::vector<PathPoint> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) out.push_back(decompose_at(p, delta, t));
  return out;
}

std::vector<SourcePoint> embedding_source_points(const ScalingLawParams& corrected_law,
                                                 const EmbeddingCorrection& corr,
                                                 int grid_side) {
  corrected_law.validate();
  corr.validate();
  if (grid_side < 2) throw std::invalid_argument("source-point grid needs side >= 2");
  const double w = corr.omega();
  std::vector<SourcePoint> out;
  out.reserve(static_cast<std::size_t>(grid_side) * grid_side);
  const double span = std::log(1e3);
  for (int i = 0; i < grid_side; ++i) {
    const double n_total = corrected_law.N0 * std::exp(span * i / (grid_side - 1));
    // Invert N = N_e + w*N_e^(1/3): x^3 + w*x - N = 0 with x = N_e^(1/3),
    // strictly increasing, so Newton from cbrt(N) converges.
    double x = std::cbrt(n_total);
    for (int it = 0; it < 100; ++it) {
      const double f = x * x * x + w * x - n_total;
      if (std::abs(f) <= 1e-12 * n_total) break;
      x -= f / (3.0 * x * x + w);
    }
    const double n_e = x * x * x;
    for (int j = 0; j < grid_side; ++j) {
      const double d = corrected_law.D0 * std::exp(span * j / (grid_side - 1));
      out.push_back({6.0 * n_e * d, n_e, loss(corrected_law, n_total, d)});
    }
  }
  return out;
}

ScalingLawParams correct_embeddings(const std::vector<SourcePoint>& points,
                                    const EmbeddingCorrection& corr) {
  corr.validate();
  const double w = corr.omega();
  std::vector<LossSample> samples;
  samples.reserve(points.size());
  for (const auto& sp : points) {
    if (!(sp.params > 0.0) || !(sp.compute > 0.0) || !(sp.loss_nats > 0.0))
      throw std::invalid_argument("source points must have positive compute, params, loss");
    const double n_total = sp.params + w * std::cbrt(sp.params);
    const double tokens = sp.compute / (6.0 * sp.params);  // D = C/(6N) is unchanged
    samples.push_back({n_total, tokens, sp.loss_nats});
  }
  return fit_scaling_law(samples);
}

ScalingLawParams convert_compute_centric(const ComputeCentricParams& q, double n0_anchor) {
  q.validate();
  if (!(n0_anchor > 0.0)) throw std::invalid_argument("conversion needs a positive N0 anchor");
  ScalingLawParams p;
  p.E = q.E;
  p.alpha = q.gamma / q.delta_exp;
  p.beta = q.gamma / (1.0 - q.delta_exp);
  p.N0 = n0_anchor;
  if (!(p.alpha < 1.0) || !(p.beta < 1.0))
    throw std::invalid_argument("conversion needs gamma < delta_exp and gamma < 1-delta_exp");
  p.D0 = (q.C_hat / 6.0) * std::pow(p.N0, p.alpha / p.beta) *
         std::pow(p.beta / p.alpha, -1.0 / p.beta);
  p.validate();
  return p;
}

ComputeCentricParams to_compute_centric(const ScalingLawParams& p) {
  p.validate();
  ComputeCentricParams q;
  q.gamma = p.alpha * p.beta / (p.alpha + p.beta);
  q.delta_exp = p.beta / (p.alpha + p.beta);
  q.E = p.E;
  q.C_hat =
      6.0 * p.D0 * std::pow(p.beta / p.alpha, 1.0 / p.beta) * std::pow(p.N0, -p.alpha / p.beta);
  q.C0 = q.C_hat *
         std::pow((p.alpha + p.beta) / p.beta * std::pow(p.N0, p.alpha), 1.0 / q.gamma);
  q.validate();
  return q;
}

ComputeAlloc compute_optimal_alloc(const ScalingLawParams& p, double compute) {
  p.validate();
  if (!(compute > 0.0)) throw std::invalid_argument("allocation needs positive compute");
  const double params =
      std::pow(p.alpha / p.beta * std::pow(p.N0, p.alpha), 1.0 / (p.alpha + p.beta)) *
      std::pow(compute / (6.0 * p.D0), p.beta / (p.alpha + p.beta));
  return {params, compute / (6.0 * params)};
}

double optimal_loss_at_compute(const ScalingLawParams& p, double compute) {
  const ComputeAlloc a = compute_optimal_alloc(p, compute);
  return loss(p, a.params, a.tokens);
}

double compute_centric_loss(const ComputeCentricParams& q, double compute) {
  q.validate();
  if (!(compute > 0.0)) throw std::invalid_argument("loss needs positive compute");
  return q.E + std::pow(q.C0 / compute, q.gamma);
}

bool MonotonicityReport::all_pass() const {
  return d_star_increasing && n_star_increasing && path_entropy_nonincreasing &&
         limits_monotone;
}

namespace {

void check_grid(const std::vector<double>& g, const char* what) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(g[i] > 0.0)) throw std::invalid_argument(std::string(what) + " grid must be positive");
    if (i > 0 && !(g[i] > g[i - 1]))
      throw std::invalid_argument(std::string(what) + " grid must be strictly increasing");
  }
}

}  // namespace

MonotonicityReport monotonicity_report(const ScalingLawParams& p, double delta,
                                       const std::vector<double>& t_grid,
                                       const std::vector<double>& test_grid) {
  p.validate();
  check_grid(t_grid, "t");
  check_grid(test_grid, "test-token");
  MonotonicityReport rep;
  auto flag = [&rep](bool& field, const std::string& msg) {
    field = false;
    if (rep.first_violation.empty()) rep.first_violation = msg;
  };
  PathPoint prev;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const PathPoint cur = decompose_at(p, delta, t_grid[i]);
    if (i > 0) {
      std::ostringstream at;
      at << " between t=" << prev.t << " and t=" << cur.t;
      if (!(cur.d_star > prev.d_star))
        flag(rep.d_star_increasing, "d* fails to increase" + at.str());
      if (!(cur.n_star > prev.n_star))
        flag(rep.n_star_increasing, "n* fails to increase" + at.str());
      if (cur.data_nats > prev.data_nats)
        flag(rep.path_entropy_nonincreasing, "path entropy increases" + at.str());
    }
    prev = cur;
  }
  double prev_s = 0.0, prev_h_rate = 0.0;
  for (std::size_t i = 0; i < test_grid.size(); ++i) {
    const Asymptotics a = asymptotics(p, test_grid[i]);
    const double h_rate = a.H_inf / test_grid[i];
    if (i > 0) {
      std::ostringstream at;
      at << " between test sizes " << test_grid[i - 1] << " and " << test_grid[i];
      if (a.S_inf < prev_s) flag(rep.limits_monotone, "S_inf decreases" + at.str());
      if (h_rate > prev_h_rate)
        flag(rep.limits_monotone, "per-token H_inf increases" + at.str());
    }
    prev_s = a.S_inf;
    prev_h_rate = h_rate;
  }
  return rep;
}

const std::vector<std::pair<std::string, ScalingLawParams>>& builtin_scaling_table() {
  // E, alpha, beta, N0, D0. D0 in tokens, E in nats.
  static const std::vector<std::pair<std::string, ScalingLawParams>> table = {
      {"image_8x8", {3.14, 0.331, 0.566, 8.0e1, 2.66e6}},
      {"image_16x16", {2.68, 0.307, 0.820, 2.8e2, 8.94e7}},
      {"image_32x32", {2.30, 0.258, 0.399, 6.3e1, 1.95e6}},
      {"image_vq_16x16", {4.23, 0.322, 0.441, 2.7e4, 4.44e7}},
      {"image_vq_32x32", {3.32, 0.287, 0.560, 1.9e4, 1.63e8}},
      {"video_vq_16x16x16", {1.15, 0.428, 0.718, 3.7e4, 1.79e8}},
      {"language_chinchilla", {1.69, 0.339, 0.285, 4.91e7, 1.49e9}},
  };
  return table;
}

ScalingLawParams table_row(const std::string& name) {
  for (const auto& [key, params] : builtin_scaling_table())
    if (key == name) return params;
  std::string names;
  for (const auto& [key, params] : builtin_scaling_table()) {
    (void)params;
    names += names.empty() ? key : ", " + key;
  }
  throw ConfigError("unknown scaling table row '" + name + "' (available: " + names + ")");
}

nlohmann::json scaling_report_json(const ScalingLawParams& p, double delta,
                                   const std::vector<double>& t_grid) {
  const Asymptotics a = asymptotics(p, delta * p.D0);
  nlohmann::json j;
  j["units"] = "nats";
  j["params"] = {{"E", p.E}, {"alpha", p.alpha}, {"beta", p.beta}, {"N0", p.N0}, {"D0", p.D0}};
  j["delta"] = delta;
  j["test_tokens"] = delta * p.D0;
  j["asymptotics"] = {{"S_inf", a.S_inf},
                      {"H_inf", a.H_inf},
                      {"epiplexity_exponent", a.epiplexity_exponent},
                      {"entropy_excess_exponent", a.entropy_excess_exponent}};
  auto& path = j["path"] = nlohmann::json::array();
  for (const PathPoint& pt : optimal_path(p, delta, t_grid)) {
    path.push_back({{"t", pt.t},
                    {"ops", pt.ops},
                    {"d_star", pt.d_star},
                    {"n_star", pt.n_star},
                    {"model_nats", pt.model_nats},
                    {"data_nats", pt.data_nats},
                    {"total_nats", pt.total_nats}});
  }
  return j;
}

void path_to_csv(const std::vector<PathPoint>& path, std::ostream& os) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "t,ops,d_star,n_star,model_nats,data_nats,total_nats\n";
  for (const PathPoint& pt : path)
    os << pt.t << ',' << pt.ops << ',' << pt.d_star << ',' << pt.n_star << ',' << pt.model_nats
       << ',' << pt.data_nats << ',' << pt.total_nats << '\n';
}

}  // namespace epimeter
