#include "epimeter/requential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "epimeter/coding.hpp"
#include "epimeter/ema.hpp"
#include "epimeter/error.hpp"
#include "epimeter/learner_factory.hpp"
#include "epimeter/rng.hpp"

namespace epimeter {

namespace {

std::vector<double> floored(std::vector<double> p, double floor) {
  for (auto& x : p) x = std::max(x, floor);
  return p;
}

void train_on_record(Learner& l, const RecordView& rec) {
  l.begin_record(rec);
  for (std::size_t pos = 0; pos < rec.size(); ++pos) {
    if (rec.mask[pos])
      l.update(rec, pos);
    else
      l.advance(rec, pos);
  }
}

}  // namespace

RequentialResult requential_run(const RequentialOptions& opt, const Dataset& train,
                                const Dataset& test) {
  if (train.vocab_size != test.vocab_size)
    throw std::invalid_argument("train and test must share a vocab");
  if (opt.bridge_real_data && !opt.static_teacher)
    throw std::invalid_argument("bridge mode needs a static teacher");
  const double floor = opt.prob_floor > 0 ? opt.prob_floor : kProbFloor;

  auto student = make_learner(opt.student_spec);
  const nlohmann::json teacher_spec =
      opt.teacher_spec.is_null() ? opt.student_spec : opt.teacher_spec;
  auto teacher = make_learner(teacher_spec);
  if (teacher->vocab_size() != student->vocab_size())
    throw std::invalid_argument("teacher and student must share a vocab");
  const CostProfile prof = student->cost_profile();

  std::vector<std::uint64_t> budgets = opt.budgets;
  if (budgets.empty()) budgets.push_back(train.masked_tokens());
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (budgets[i] == 0) throw std::invalid_argument("budgets must be positive");
    if (i && budgets[i] <= budgets[i - 1])
      throw std::invalid_argument("budgets must be strictly increasing");
  }

  if (opt.static_teacher)
    for (std::size_t pass = 0; pass < opt.pretrain_passes; ++pass)
      for (std::size_t r = 0; r < train.record_count(); ++r)
        train_on_record(*teacher, train.record(r));

  const bool live = !opt.static_teacher;
  std::unique_ptr<Learner> ema;
  EmaSchedule sched{opt.ema_tau};
  if (live && opt.ema_tau > 0) {
    sched.validate();
    ema = teacher->clone();
  }

  RequentialResult out;
  CodingTrace& tr = out.trace;
  tr.mode = opt.bridge_real_data ? "requential_bridge" : "requential";
  tr.learner_kind = student->kind();
  tr.hyperparams = learner_spec_id(opt.student_spec);
  tr.seed = opt.seed;
  tr.prob_floor = floor;
  tr.profile = prof;
  tr.data_tokens = test.masked_tokens();
  tr.test_total_tokens = test.total_tokens();

  SplitMix64 rng(opt.seed);
  const std::uint64_t k = test.record_count();
  double cum_kl = 0, cum_overhead = 0;
  std::uint64_t cum_tokens = 0;
  std::size_t next_budget = 0;
  bool frozen = false;
  std::vector<Token> buf;

  auto checkpoint = [&](bool into_points) {
    // score a clone so evaluation never perturbs the student's record context
    // (the final snapshot is the state at the end of the consumed stream)
    const auto probe = student->clone();
    const EvalResult ev = evaluate_model(*probe, test, opt.heldout_records, floor);
    tr.data_bits = scale_test_loss(ev.record_losses, k, ev.heldout_records);
    tr.final_loss_bits_per_token =
        tr.data_tokens ? tr.data_bits / tr.data_tokens : 0.0;
    tr.model_bits_raw = cum_kl;
    tr.model_bits = std::max(0.0, cum_kl);
    tr.model_bits_with_overhead = std::max(0.0, cum_kl + cum_overhead);
    tr.train_tokens = cum_tokens;
    if (into_points) {
      const CostModel cost = make_cost_model(cum_tokens, tr.test_total_tokens, prof);
      out.points.push_back(two_part(tr, cost));
    }
  };

  for (std::uint64_t step = 0;; ++step) {
    if (next_budget >= budgets.size()) break;
    std::size_t r;
    if (live) {
      if (step >= train.record_count()) {
        tr.truncated = true;
        break;
      }
      r = static_cast<std::size_t>(step);
    } else {
      r = static_cast<std::size_t>(step % train.record_count());
    }
    const RecordView rec = train.record(r);

    if (live && !frozen && !opt.lockstep) {
      train_on_record(*teacher, rec);
      if (ema) ema_update(sched, *ema, *teacher);
    }
    Learner* sampler = ema ? ema.get() : teacher.get();

    double step_bits = 0;
    std::uint64_t step_tokens = 0;
    if (!opt.bridge_real_data) {
      buf.assign(rec.tokens.begin(), rec.tokens.end());
      const RecordView sv{std::span<const Token>(buf), rec.mask, rec.roles, rec.input_len};
      sampler->begin_record(sv);
      student->begin_record(sv);
      for (std::size_t pos = 0; pos < sv.size(); ++pos) {
        if (rec.mask[pos]) {
          const auto p_t = sampler->predict(sv, pos);
          const auto p_s = floored(student->predict(sv, pos), floor);
          double kl;
          try {
            kl = token_kl(p_t, p_s);
          } catch (const NumericError& e) {
            throw RunError("requential step " + std::to_string(step) + ": " + e.what());
          }
          step_bits += kl;
          ++step_tokens;
          buf[pos] = static_cast<Token>(sample_index(p_t, rng.next_double()));
          if (opt.lockstep)
            sampler->update(sv, pos);
          else
            sampler->advance(sv, pos);
          student->update(sv, pos);
        } else {
          sampler->advance(sv, pos);
          student->advance(sv, pos);
        }
      }
    } else {
      teacher->begin_record(rec);
      student->begin_record(rec);
      for (std::size_t pos = 0; pos < rec.size(); ++pos) {
        if (rec.mask[pos]) {
          const double ls =
              token_loss_bits(student->predict(rec, pos), rec.tokens[pos], floor);
          const double lt =
              token_loss_bits(teacher->predict(rec, pos), rec.tokens[pos], floor);
          step_bits += ls - lt;
          ++step_tokens;
          teacher->advance(rec, pos);
          student->update(rec, pos);
        } else {
          teacher->advance(rec, pos);
          student->advance(rec, pos);
        }
      }
    }

    const double overhead = std::log2(1.0 + std::max(0.0, step_bits)) + 4.0;
    cum_kl += step_bits;
    cum_overhead += overhead;
    cum_tokens += step_tokens;
    tr.steps.push_back({step, step_bits, overhead, step_tokens,
                        cum_tokens * (prof.predict_ops + prof.update_ops)});
    if (live && !opt.bridge_real_data)
      frozen = step_tokens > 0 && step_bits / step_tokens > opt.max_kl;

    while (next_budget < budgets.size() && cum_tokens >= budgets[next_budget]) {
      checkpoint(true);
      ++next_budget;
    }
  }

  checkpoint(false);  // final trace summary, with or without remaining budgets

  std::ostringstream snap(std::ios::binary);
  student->save(snap);
  const std::string bytes = snap.str();
  out.final_student_snapshot.assign(bytes.begin(), bytes.end());
  return out;
}

}  // namespace epimeter
