#include "epimeter/fit.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "epimeter/error.hpp"

namespace epimeter {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

// theta = (log E, logit alpha, logit beta, log N0, log D0)
ScalingLawParams unpack(const Eigen::VectorXd& th) {
  ScalingLawParams p;
  p.E = std::exp(th[0]);
  p.alpha = sigmoid(th[1]);
  p.beta = sigmoid(th[2]);
  p.N0 = std::exp(th[3]);
  p.D0 = std::exp(th[4]);
  return p;
}

// Residuals r_i = log(model_i) - log(observed_i); J optional.
double sse_at(const std::vector<LossSample>& pts, const Eigen::VectorXd& th,
              Eigen::VectorXd* r, Eigen::MatrixXd* J) {
  const ScalingLawParams p = unpack(th);
  double sse = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double la = std::log(p.N0 / pts[i].params);
    const double lb = std::log(p.D0 / pts[i].tokens);
    const double a = std::exp(p.alpha * la);
    const double b = std::exp(p.beta * lb);
    const double m = p.E + a + b;
    if (!std::isfinite(m) || m <= 0.0) return kInf;
    const double ri = std::log(m) - std::log(pts[i].loss_nats);
    sse += ri * ri;
    if (r) (*r)[static_cast<Eigen::Index>(i)] = ri;
    if (J) {
      const auto row = static_cast<Eigen::Index>(i);
      (*J)(row, 0) = p.E / m;
      (*J)(row, 1) = a * la * p.alpha * (1.0 - p.alpha) / m;
      (*J)(row, 2) = b * lb * p.beta * (1.0 - p.beta) / m;
      (*J)(row, 3) = a * p.alpha / m;
      (*J)(row, 4) = b * p.beta / m;
    }
  }
  return std::isfinite(sse) ? sse : kInf;
}

// One Levenberg-Marquardt descent from th; returns final SSE, th updated in place.
double lm_descend(const std::vector<LossSample>& pts, Eigen::VectorXd& th) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::VectorXd r(n);
  Eigen::MatrixXd J(n, 5);
  double sse = sse_at(pts, th, &r, &J);
  if (!std::isfinite(sse)) return kInf;
  double lambda = 1e-3;
  for (int iter = 0; iter < 300; ++iter) {
    Eigen::MatrixXd A = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    A.diagonal() += lambda * (A.diagonal() + Eigen::VectorXd::Constant(5, 1e-12));
    const Eigen::VectorXd step = A.ldlt().solve(-g);
    if (!step.allFinite()) break;
    const Eigen::VectorXd cand = th + step;
    Eigen::VectorXd r2(n);
    Eigen::MatrixXd J2(n, 5);
    const double cand_sse = sse_at(pts, cand, &r2, &J2);
    if (cand_sse < sse) {
      const double gain = sse - cand_sse;
      th = cand;
      r.swap(r2);
      J.swap(J2);
      sse = cand_sse;
      lambda = std::max(lambda / 3.0, 1e-14);
      if (gain < 1e-16 * (1.0 + sse) || sse < 1e-24) break;
    } else {
      lambda *= 10.0;
      if (lambda > 1e14) break;
    }
  }
  return sse;
}

}  // namespace

ScalingLawParams fit_scaling_law(const std::vector<LossSample>& samples) {
  if (samples.size() < 5)
    throw std::invalid_argument("scaling-law fit needs at least 5 samples");
  std::set<double> distinct_n, distinct_d;
  double log_n = 0.0, log_d = 0.0, min_loss = kInf;
  for (const auto& s : samples) {
    if (!(s.params > 0.0) || !(s.tokens > 0.0) || !(s.loss_nats > 0.0))
      throw std::invalid_argument("scaling-law fit samples must be positive");
    distinct_n.insert(s.params);
    distinct_d.insert(s.tokens);
    log_n += std::log(s.params);
    log_d += std::log(s.tokens);
    min_loss = std::min(min_loss, s.loss_nats);
  }
  if (distinct_n.size() < 2 || distinct_d.size() < 2)
    throw NumericError("scaling-law fit is degenerate: samples span a single N or D value");
  log_n /= static_cast<double>(samples.size());
  log_d /= static_cast<double>(samples.size());

  double best_sse = kInf;
  Eigen::VectorXd best(5);
  for (double a0 : {0.2, 0.35, 0.5, 0.7}) {
    for (double b0 : {0.2, 0.35, 0.5, 0.7}) {
      for (double e0 : {0.25 * min_loss, 0.9 * min_loss}) {
        Eigen::VectorXd th(5);
        th << std::log(std::max(e0, 1e-12)), logit(a0), logit(b0), log_n, log_d;
        const double sse = lm_descend(samples, th);
        if (sse < best_sse) {
          best_sse = sse;
          best = th;
        }
      }
    }
  }
  if (!std::isfinite(best_sse))
    throw NumericError("scaling-law fit failed: no start converged to a finite objective");
  ScalingLawParams p = unpack(best);
  p.validate();
  return p;
}

}  // namespace epimeter
