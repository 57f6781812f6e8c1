#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "epimeter/controls.hpp"
#include "epimeter/eca.hpp"
#include "epimeter/kt.hpp"
#include "epimeter/learner_factory.hpp"
#include "epimeter/rng.hpp"
#include "epimeter/uniform_learner.hpp"
#include "epimeter/windowed.hpp"
#include "test_util.hpp"

using namespace epimeter;
using nlohmann::json;

// unconditional single-block record over the given tokens
struct FlatRecord {
  std::vector<Token> toks;
  std::vector<std::uint8_t> msk, rls;
  explicit FlatRecord(std::vector<Token> t) : toks(std::move(t)) {
    msk.assign(toks.size(), 1);
    rls.assign(toks.size(), kRoleTarget);
  }
  RecordView view() const { return {toks, msk, rls, 0}; }
};

static void kt_closed_forms() {
  KtContext kt(2, 0);
  FlatRecord rec({1, 1, 1, 1, 1, 1, 1, 1});
  RecordView v = rec.view();
  kt.begin_record(v);

  // fresh table: uniform prior
  auto p0 = kt.predict(v, 0);
  CHECK_NEAR(p0[0], 0.5, 1e-12);
  CHECK_NEAR(p0[1], 0.5, 1e-12);

  // after m ones: P(1) = (m + 1/2) / (m + 1)
  for (std::size_t m = 0; m < v.size(); ++m) {
    kt.update(v, m);
    auto p = kt.predict(v, std::min(m + 1, v.size() - 1));
    CHECK_NEAR(p[1], (m + 1 + 0.5) / (m + 2.0), 1e-12);
  }

  // one observed '1' from scratch: P(1) = 1.5/2 = 0.75
  KtContext kt1(2, 0);
  kt1.begin_record(v);
  kt1.update(v, 0);
  CHECK_NEAR(kt1.predict(v, 1)[1], 0.75, 1e-12);
}

static void kt_order_contexts() {
  // order-1 on period-2 data learns the alternation exactly
  KtContext kt(2, 1);
  std::vector<Token> alt;
  for (int i = 0; i < 200; ++i) alt.push_back(static_cast<Token>(i % 2));
  FlatRecord rec(alt);
  RecordView v = rec.view();
  kt.begin_record(v);
  for (std::size_t i = 0; i < v.size(); ++i) kt.update(v, i);

  kt.begin_record(v);
  kt.advance(v, 0);  // context now "0"
  CHECK(kt.predict(v, 1)[1] > 0.98);
  kt.advance(v, 1);  // context now "1"
  CHECK(kt.predict(v, 2)[0] > 0.98);

  // distinct contexts hold independent counts
  CHECK(kt.table().distinct_contexts() >= 2);
}

static void prediction_contract() {
  // normalization and nonnegativity across learners and random streams
  ControlConfig cc;
  cc.kind = ControlKind::uniform;
  cc.length = 512;
  cc.vocab = 5;
  Dataset ds = control_generate(cc, 33);

  std::vector<json> specs = {
      {{"kind", "uniform"}, {"vocab", 5}},
      {{"kind", "kt"}, {"vocab", 5}, {"order", 0}},
      {{"kind", "kt"}, {"vocab", 5}, {"order", 2}},
  };
  for (const auto& spec : specs) {
    auto L = make_learner(spec);
    for (std::size_t r = 0; r < ds.record_count(); ++r) {
      RecordView rec = ds.record(r);
      L->begin_record(rec);
      for (std::size_t i = 0; i < rec.size(); ++i) {
        auto p = L->predict(rec, i);
        CHECK(p.size() == 5);
        double sum = 0.0;
        for (double x : p) {
          CHECK(x >= 0.0);
          sum += x;
        }
        CHECK_NEAR(sum, 1.0, 1e-9);
        L->update(rec, i);
        if (test_failures) return;
      }
    }
  }
}

static void update_determinism() {
  ControlConfig cc;
  cc.kind = ControlKind::uniform;
  cc.length = 400;
  cc.vocab = 3;
  Dataset ds = control_generate(cc, 7);

  auto run = [&]() {
    auto L = make_learner(json{{"kind", "kt"}, {"vocab", 3}, {"order", 1}});
    for (std::size_t r = 0; r < ds.record_count(); ++r) {
      RecordView rec = ds.record(r);
      L->begin_record(rec);
      for (std::size_t i = 0; i < rec.size(); ++i) L->update(rec, i);
    }
    return L;
  };
  auto a = run(), b = run();
  RecordView rec = ds.record(0);
  a->begin_record(rec);
  b->begin_record(rec);
  for (std::size_t i = 0; i < 100 && i < rec.size(); ++i) {
    CHECK(a->predict(rec, i) == b->predict(rec, i));
    a->advance(rec, i);
    b->advance(rec, i);
    if (test_failures) return;
  }
}

static void sampler_consistency() {
  auto L = make_learner(json{{"kind", "uniform"}, {"vocab", 4}});
  FlatRecord rec({0, 0, 0, 0});
  RecordView v = rec.view();
  L->begin_record(v);
  SplitMix64 rng(55);
  const int draws = 100000;
  std::vector<long> count(4, 0);
  for (int i = 0; i < draws; ++i) ++count[L->sample(v, 0, rng.next_double())];
  double expect = draws / 4.0, sigma = std::sqrt(expect * 0.75);
  for (long c : count) CHECK(std::fabs(c - expect) < 3 * sigma);

  // KT after skewed observations: frequencies track predict within 3 sigma
  auto kt = make_learner(json{{"kind", "kt"}, {"vocab", 2}, {"order", 0}});
  FlatRecord ones({1, 1, 1, 1, 1, 1});
  RecordView vo = ones.view();
  kt->begin_record(vo);
  for (std::size_t i = 0; i < vo.size(); ++i) kt->update(vo, i);
  auto p = kt->predict(vo, 0);
  std::vector<long> c2(2, 0);
  for (int i = 0; i < draws; ++i) ++c2[kt->sample(vo, 0, rng.next_double())];
  for (int k = 0; k < 2; ++k) {
    double mu = draws * p[k], sd = std::sqrt(draws * p[k] * (1 - p[k]));
    CHECK(std::fabs(c2[k] - mu) < 3 * sd);
  }

  // same seed, same tokens
  SplitMix64 s1(9), s2(9);
  for (int i = 0; i < 100; ++i)
    CHECK(L->sample(v, 0, s1.next_double()) == L->sample(v, 0, s2.next_double()));
}

static void windowed_alignment() {
  // one-step rule-204 data: target j equals input j, so the centered
  // width-1 window predicts perfectly after training
  EcaConfig cfg{204, 16, 1, 0};
  Dataset ds = eca_generate(cfg, 200, 4);
  WindowedSpec spec;
  spec.vocab = 2;
  spec.offsets = {0};
  auto L = make_learner(
      json{{"kind", "windowed"}, {"vocab", 2}, {"offsets", {0}}, {"prev_r", 0}});
  for (std::size_t r = 0; r < ds.record_count(); ++r) {
    RecordView rec = ds.record(r);
    L->begin_record(rec);
    for (std::size_t i = rec.input_len; i < rec.size(); ++i) L->update(rec, i);
  }
  double loss = 0.0;
  long n = 0;
  for (std::size_t r = 0; r < 50; ++r) {
    RecordView rec = ds.record(r);
    L->begin_record(rec);
    for (std::size_t i = rec.input_len; i < rec.size(); ++i) {
      loss -= std::log2(L->predict(rec, i)[rec.tokens[i]]);
      L->advance(rec, i);
      ++n;
    }
  }
  CHECK(loss / n < 0.05);  // near-deterministic copy

  // wrap=true: window offsets reach around the ring
  WindowedConditional ring(WindowedSpec{2, {-8, 8}, 0, true});
  RecordView rec = ds.record(0);
  ring.begin_record(rec);
  auto p = ring.predict(rec, rec.input_len);
  CHECK_NEAR(p[0] + p[1], 1.0, 1e-12);

  CHECK_THROWS_AS(WindowedConditional(WindowedSpec{2, {}, 0, true}),
                  std::invalid_argument);
}

static void capacity_checks() {
  // pack_slots is a radix encoding (last slot most significant): injective
  std::vector<std::uint32_t> slots = {3, 1, 4, 1};
  CHECK(pack_slots(slots, 7) == ((std::uint64_t(1) * 7 + 4) * 7 + 1) * 7 + 3);
  std::vector<std::uint32_t> other = {1, 3, 4, 1};
  CHECK(pack_slots(slots, 7) != pack_slots(other, 7));
  CHECK_THROWS_AS(check_key_capacity(40, 65537), std::invalid_argument);
  check_key_capacity(8, 5);  // fits comfortably; must not throw

  // kt order too deep for the vocab radix
  CHECK_THROWS_AS(make_learner(json{{"kind", "kt"}, {"vocab", 65535}, {"order", 10}}),
                  std::exception);
}

static void save_load_round_trip() {
  ControlConfig cc;
  cc.kind = ControlKind::uniform;
  cc.length = 300;
  cc.vocab = 3;
  Dataset ds = control_generate(cc, 12);

  std::vector<json> specs = {
      {{"kind", "uniform"}, {"vocab", 3}},
      {{"kind", "kt"}, {"vocab", 3}, {"order", 1}},
      {{"kind", "windowed"}, {"vocab", 2}, {"offsets", {-1, 0, 1}}, {"prev_r", 1}},
  };
  for (const auto& spec : specs) {
    auto L = make_learner(spec);
    if (spec["kind"] != "windowed") {
      for (std::size_t r = 0; r < ds.record_count(); ++r) {
        RecordView rec = ds.record(r);
        L->begin_record(rec);
        for (std::size_t i = 0; i < rec.size(); ++i) L->update(rec, i);
      }
    }
    std::ostringstream os;
    L->save(os);
    std::istringstream is(os.str());
    auto M = load_learner(is);
    CHECK(M->kind() == L->kind());
    CHECK(M->vocab_size() == L->vocab_size());
    std::ostringstream os2;
    M->save(os2);
    CHECK(os.str() == os2.str());  // snapshot round-trips bit-exactly
  }
}

static void clone_blend() {
  FlatRecord rec({1, 1, 1, 1});
  RecordView v = rec.view();

  KtContext a(2, 0), b(2, 0);
  a.begin_record(v);
  b.begin_record(v);
  for (int i = 0; i < 4; ++i) a.update(v, i);  // a holds 4 ones
  b.update(v, 0);                              // b holds 1 one

  auto c = a.clone();
  CHECK(c->predict(v, 0) == a.predict(v, 0));
  c->update(v, 0);  // clone diverges without touching the original
  CHECK(!(c->predict(v, 0) == a.predict(v, 0)));

  // blend_from: counts become w*prev + (1-w)*raw
  KtContext mix(2, 0);
  mix.blend_from(a, b, 0.25);
  // blended count for '1' = 0.25*4 + 0.75*1 = 1.75 -> P(1) = 2.25/2.75
  CHECK_NEAR(mix.predict(v, 0)[1], (1.75 + 0.5) / (1.75 + 1.0), 1e-12);

  UniformBaseline u(2);
  CHECK_THROWS_AS(u.blend_from(a, b, 0.5), std::invalid_argument);
}

static void factory_validation() {
  CHECK_THROWS_AS(make_learner(json{{"kind", "bogus"}}), std::exception);
  CHECK_THROWS_AS(make_learner(json{{"kind", "kt"}, {"vocab", 2}, {"ordr", 1}}),
                  std::exception);
  CHECK_THROWS_AS(make_learner(json{{"kind", "kt"}, {"vocab", 1}, {"order", 0}}),
                  std::exception);

  // normalization fills defaults and is idempotent
  json spec = normalize_learner_spec(json{{"kind", "kt"}, {"vocab", 4}});
  CHECK(spec.contains("order"));
  CHECK(normalize_learner_spec(spec) == spec);
  CHECK(learner_spec_id(spec) == spec.dump());
}

int main() {
  kt_closed_forms();
  kt_order_contexts();
  prediction_contract();
  update_determinism();
  sampler_consistency();
  windowed_alignment();
  capacity_checks();
  save_load_round_trip();
  clone_blend();
  factory_validation();
  return test_summary("test_learners");
}
