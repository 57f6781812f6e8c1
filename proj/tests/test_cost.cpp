// compute accounting: per-learner op profiles, the train/infer cost model,
// and the exactly-once update semantics the token counts rely on.
#include <cstdint>
#include <vector>

#include "epimeter/coding.hpp"
#include "epimeter/controls.hpp"
#include "epimeter/cost.hpp"
#include "epimeter/eca.hpp"
#include "epimeter/learner_factory.hpp"
#include "epimeter/requential.hpp"
#include "test_util.hpp"

using namespace epimeter;

namespace {

Dataset uniform_stream(std::uint64_t length, std::uint64_t record_len,
                       std::uint64_t seed) {
  ControlConfig cfg;
  cfg.kind = ControlKind::uniform;
  cfg.length = length;
  cfg.vocab = 2;
  cfg.record_len = record_len;
  return control_generate(cfg, seed);
}

}  // namespace

static void cost_model_arithmetic() {
  CostModel m = make_cost_model(8192, 32768, CostProfile{1, 0});
  CHECK(m.train_ops == 8192);
  CHECK(m.infer_ops == 32768);
  CHECK(m.total() == 40960);

  m = make_cost_model(100, 50, CostProfile{4, 2});
  CHECK(m.train_ops == 600);
  CHECK(m.infer_ops == 200);
  CHECK(m.total() == 800);

  m = make_cost_model(0, 10, CostProfile{3, 5});
  CHECK(m.train_ops == 0);
  CHECK(m.total() == 30);
}

static void factory_profiles() {
  auto prof = [](const nlohmann::json& spec) {
    return make_learner(spec)->cost_profile();
  };

  CostProfile u = prof({{"kind", "uniform"}, {"vocab", 2}});
  CHECK(u.predict_ops == 1 && u.update_ops == 0);

  CostProfile kt = prof({{"kind", "kt"}, {"vocab", 7}, {"order", 1}});
  CHECK(kt.predict_ops == 14 && kt.update_ops == 2);

  CostProfile win = prof({{"kind", "windowed"},
                          {"vocab", 5},
                          {"offsets", nlohmann::json::array({0})}});
  CHECK(win.predict_ops == 10 && win.update_ops == 2);

  // table learners charge two vocab scans per predict, two writes per update
  auto mt = make_learner({{"kind", "markov_table"}, {"chain_vocab", 4}});
  CostProfile mp = mt->cost_profile();
  CHECK(mp.predict_ops == 2ull * mt->vocab_size() && mp.update_ops == 2);

  auto mo = make_learner({{"kind", "oracle_markov"}, {"vocab", 5}});
  CHECK(mo->vocab_size() == 6);
  CostProfile op = mo->cost_profile();
  CHECK(op.predict_ops == 12 && op.update_ops == 2);

  // the latent-enumeration oracle charges its candidate-set size
  CostProfile fwd = prof({{"kind", "oracle_hidden_bits"},
                          {"state_size", 12},
                          {"hidden", 3},
                          {"fwd_steps", 1},
                          {"rule", 30}});
  CHECK(fwd.predict_ops == 8 && fwd.update_ops == 8);

  CostProfile rev = prof({{"kind", "oracle_hidden_bits"},
                          {"state_size", 10},
                          {"hidden", 0},
                          {"fwd_steps", 1},
                          {"rule", 30},
                          {"reversed", true}});
  CHECK(rev.predict_ops == 1024 && rev.update_ops == 1024);
}

static void prequential_accounting() {
  // unconditional streams: every token is masked, so charged ops follow the
  // token counts exactly
  const Dataset train = uniform_stream(4096, 128, 41);
  const Dataset test = uniform_stream(1024, 128, 42);

  PrequentialOptions opt;
  opt.budgets = {1024, 2048, 4096};
  const nlohmann::json kt = {{"kind", "kt"}, {"vocab", 2}, {"order", 0}};
  PrequentialResult res = prequential_run(kt, train, test, opt);

  const std::uint64_t per_tok = 4 + 2;  // kt vocab 2: predict 4, update 2
  std::uint64_t cum = 0;
  for (const auto& s : res.trace.steps) {
    cum += s.tokens;
    CHECK(s.cum_ops == cum * per_tok);
  }
  CHECK(res.points.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(res.points[i].t_ops == opt.budgets[i] * per_tok + 1024 * 4);
    if (i) CHECK(res.points[i].t_ops > res.points[i - 1].t_ops);
  }

  const nlohmann::json uni = {{"kind", "uniform"}, {"vocab", 2}};
  PrequentialResult ures = prequential_run(uni, train, test, {});
  CHECK(ures.points[0].t_ops == 4096 * 1 + 1024 * 1);
}

static void requential_accounting() {
  // points charge the student's profile over sampled tokens plus inference
  const Dataset train = uniform_stream(512, 64, 43);
  const Dataset test = uniform_stream(256, 64, 44);

  RequentialOptions opt;
  opt.student_spec = {{"kind", "uniform"}, {"vocab", 2}};
  opt.teacher_spec = {{"kind", "kt"}, {"vocab", 2}, {"order", 0}};
  opt.static_teacher = true;
  opt.budgets = {256, 512};
  RequentialResult res = requential_run(opt, train, test);

  CHECK(res.points.size() == 2);
  CHECK(res.points[0].t_ops == 256 * 1 + 256 * 1);
  CHECK(res.points[1].t_ops == 512 * 1 + 256 * 1);
  std::uint64_t cum = 0;
  for (const auto& s : res.trace.steps) {
    cum += s.tokens;
    CHECK(s.cum_ops == cum * 1);
  }
}

static void exactly_once_updates() {
  // bridge mode must train the student once per masked real token: its final
  // snapshot matches a hand loop with update-on-masked / advance-on-input
  EcaConfig cfg;
  cfg.rule = 110;
  cfg.width = 12;
  cfg.steps = 1;
  const Dataset train = eca_generate(cfg, 50, 77);
  const Dataset test = eca_generate(cfg, 20, 78);
  const nlohmann::json spec = {{"kind", "kt"}, {"vocab", 2}, {"order", 1}};

  RequentialOptions opt;
  opt.student_spec = spec;
  opt.static_teacher = true;
  opt.bridge_real_data = true;
  RequentialResult res = requential_run(opt, train, test);

  auto manual = make_learner(spec);
  for (std::size_t r = 0; r < train.record_count(); ++r) {
    RecordView rec = train.record(r);
    manual->begin_record(rec);
    for (std::size_t i = 0; i < rec.size(); ++i) {
      if (rec.mask[i])
        manual->update(rec, i);
      else
        manual->advance(rec, i);
    }
  }
  std::ostringstream os(std::ios::binary);
  manual->save(os);
  const std::string bytes = os.str();
  CHECK(res.final_student_snapshot ==
        std::vector<std::uint8_t>(bytes.begin(), bytes.end()));

  // sampled-stream mode trains on different tokens, so snapshots diverge
  RequentialOptions sampled = opt;
  sampled.bridge_real_data = false;
  RequentialResult res2 = requential_run(sampled, train, test);
  CHECK(res2.final_student_snapshot != res.final_student_snapshot);
}

int main() {
  cost_model_arithmetic();
  factory_profiles();
  prequential_accounting();
  requential_accounting();
  exactly_once_updates();
  return test_summary("test_cost");
}
