#include "epimeter/coding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "epimeter/error.hpp"
#include "epimeter/learner_factory.hpp"

namespace epimeter {

double token_kl(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("KL needs a shared vocab");
  double kl = 0;
  for (std::size_t v = 0; v < p.size(); ++v) {
    if (p[v] <= 0) continue;
    if (q[v] <= 0)
      throw NumericError("infinite KL: coding distribution assigns zero to symbol " +
                         std::to_string(v));
    kl += p[v] * std::log2(p[v] / q[v]);
  }
  return kl > 0 ? kl : 0.0;
}

double token_loss_bits(const std::vector<double>& p, Token t, double floor) {
  if (t >= p.size()) throw std::invalid_argument("token out of range");
  const double pr = std::max(p[t], floor);
  if (!(pr > 0) || !std::isfinite(pr))
    throw NumericError("zero predicted probability for token " + std::to_string(t));
  return -std::log2(pr);
}

double scale_test_loss(const std::vector<double>& heldout_record_losses, std::uint64_t k,
                       std::uint64_t k_hat) {
  if (k_hat == 0) throw std::invalid_argument("heldout record count must be >= 1");
  if (k_hat != heldout_record_losses.size())
    throw std::invalid_argument("heldout count does not match loss list");
  if (k < k_hat) throw std::invalid_argument("test records must be >= heldout records");
  double sum = 0;
  for (double l : heldout_record_losses) sum += l;
  return sum * static_cast<double>(k) / static_cast<double>(k_hat);
}

EvalResult evaluate_model(Learner& model, const Dataset& test, std::size_t heldout_records,
                          double floor) {
  EvalResult r;
  const std::size_t n = test.record_count();
  const std::size_t k_hat = heldout_records == 0 ? n : std::min(heldout_records, n);
  r.record_losses.reserve(k_hat);
  for (std::size_t i = 0; i < k_hat; ++i) {
    const RecordView rec = test.record(i);
    model.begin_record(rec);
    double rec_bits = 0;
    for (std::size_t pos = 0; pos < rec.size(); ++pos) {
      if (rec.mask[pos]) {
        rec_bits += token_loss_bits(model.predict(rec, pos), rec.tokens[pos], floor);
        ++r.heldout_masked_tokens;
      }
      model.advance(rec, pos);
    }
    r.record_losses.push_back(rec_bits);
    r.heldout_bits += rec_bits;
    r.heldout_total_tokens += rec.size();
  }
  r.heldout_records = k_hat;
  return r;
}

namespace {

// Rescores the first `records` train records under the current model.
double rescore_train(Learner& model, const Dataset& train, std::size_t records,
                     double floor) {
  double bits = 0;
  for (std::size_t i = 0; i < records; ++i) {
    const RecordView rec = train.record(i);
    model.begin_record(rec);
    for (std::size_t pos = 0; pos < rec.size(); ++pos) {
      if (rec.mask[pos])
        bits += token_loss_bits(model.predict(rec, pos), rec.tokens[pos], floor);
      model.advance(rec, pos);
    }
  }
  return bits;
}

}  // namespace

PrequentialResult prequential_run(const nlohmann::json& learner_spec, const Dataset& train,
                                  const Dataset& test, const PrequentialOptions& opt) {
  if (train.vocab_size != test.vocab_size)
    throw std::invalid_argument("train and test must share a vocab");
  auto learner = make_learner(learner_spec);
  const CostProfile prof = learner->cost_profile();

  std::vector<std::uint64_t> budgets = opt.budgets;
  const std::uint64_t avail = train.masked_tokens();
  if (budgets.empty()) budgets.push_back(avail);
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (budgets[i] == 0) throw std::invalid_argument("budgets must be positive");
    if (i && budgets[i] <= budgets[i - 1])
      throw std::invalid_argument("budgets must be strictly increasing");
  }
  if (budgets.back() > avail)
    throw std::invalid_argument("budget exceeds the train stream's masked tokens");

  PrequentialResult out;
  CodingTrace& tr = out.trace;
  tr.mode = "prequential";
  tr.learner_kind = learner->kind();
  tr.hyperparams = learner_spec_id(learner_spec);
  tr.seed = opt.seed;
  tr.prob_floor = opt.prob_floor;
  tr.profile = prof;
  tr.data_tokens = test.masked_tokens();
  tr.test_total_tokens = test.total_tokens();

  const std::uint64_t k = test.record_count();
  double train_bits = 0;
  std::uint64_t cum_tokens = 0;
  std::size_t next_budget = 0;

  for (std::size_t r = 0; r < train.record_count() && next_budget < budgets.size(); ++r) {
    const RecordView rec = train.record(r);
    learner->begin_record(rec);
    double step_bits = 0;
    std::uint64_t step_tokens = 0;
    for (std::size_t pos = 0; pos < rec.size(); ++pos) {
      if (rec.mask[pos]) {
        double loss;
        try {
          loss = token_loss_bits(learner->predict(rec, pos), rec.tokens[pos],
                                 opt.prob_floor);
        } catch (const NumericError& e) {
          throw RunError("prequential step " + std::to_string(r) + ": " + e.what());
        }
        step_bits += loss;
        ++step_tokens;
        learner->update(rec, pos);
      } else {
        learner->advance(rec, pos);
      }
    }
    train_bits += step_bits;
    cum_tokens += step_tokens;
    tr.steps.push_back({r, step_bits, 0.0, step_tokens,
                        cum_tokens * (prof.predict_ops + prof.update_ops)});

    while (next_budget < budgets.size() && cum_tokens >= budgets[next_budget]) {
      const EvalResult ev = evaluate_model(*learner, test, opt.heldout_records,
                                           opt.prob_floor);
      const double data_bits = scale_test_loss(ev.record_losses, k, ev.heldout_records);
      double final_bits;  // code length of the consumed stream under the current model
      if (opt.exact_rescore)
        final_bits = rescore_train(*learner, train, r + 1, opt.prob_floor);
      else
        final_bits = tr.data_tokens ? data_bits / tr.data_tokens * cum_tokens : 0.0;
      const double raw = train_bits - final_bits;

      tr.final_loss_bits_per_token = cum_tokens ? final_bits / cum_tokens : 0.0;
      tr.model_bits_raw = raw;
      tr.model_bits = std::max(0.0, raw);
      tr.data_bits = data_bits;
      tr.train_tokens = cum_tokens;

      const CostModel cost = make_cost_model(cum_tokens, tr.test_total_tokens, prof);
      out.points.push_back(two_part(tr, cost));
      ++next_budget;
    }
  }
  return out;
}

}  // namespace epimeter
