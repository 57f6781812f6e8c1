#include "epimeter/markov.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "test_util.hpp"

using namespace epimeter;

static void quantization() {
  CHECK(markov_digits_per_entry(2) == 8);    // 2^8 = 256
  CHECK(markov_digits_per_entry(4) == 4);    // 4^4 = 256
  CHECK(markov_digits_per_entry(8) == 3);    // 8^3 = 512
  CHECK(markov_digits_per_entry(16) == 2);   // 16^2 = 256
  CHECK(markov_digits_per_entry(255) == 2);

  std::vector<double> row = {0.5, 0.25, 0.25};
  auto q = quantize_row(row);
  int sum = 0;
  for (int v : q) sum += v;
  CHECK(sum == kMarkovQuantDenominator);

  // dequantized row sums to exactly 255/255
  auto back = dequantize_row(q);
  double s = 0.0;
  for (double v : back) s += v;
  CHECK_NEAR(s, 1.0, 1e-12);
  for (std::size_t i = 0; i < row.size(); ++i)
    CHECK_NEAR(back[i], row[i], 1.0 / kMarkovQuantDenominator);

  // largest-remainder determinism
  std::vector<double> tie = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  CHECK(quantize_row(tie) == quantize_row(tie));
}

static void record_layout() {
  MarkovSpec spec{4, 1, 32};
  Dataset ds = markov_generate(spec, 10, 5);
  CHECK(ds.vocab_size == 5);  // V + separator
  const std::uint32_t digits = markov_digits_per_entry(4);
  const std::size_t input_len = 3 * 4 * digits + 1;  // 3 visible rows + separator
  for (std::size_t r = 0; r < ds.record_count(); ++r) {
    RecordView rec = ds.record(r);
    CHECK(rec.input_len == input_len);
    CHECK(rec.target_len() == 32);
    CHECK(rec.tokens[input_len - 1] == 4);  // separator token = V
    // row digits and chain tokens stay below V; separator appears once
    for (std::size_t i = 0; i < input_len - 1; ++i) CHECK(rec.tokens[i] < 4);
    for (std::size_t i = input_len; i < rec.size(); ++i) {
      CHECK(rec.tokens[i] < 4);
      CHECK(rec.mask[i] == 1);
    }
    if (test_failures) return;
  }

  // h = V: no visible rows, input block is just the separator
  MarkovSpec all_hidden{4, 4, 16};
  Dataset dh = markov_generate(all_hidden, 3, 5);
  RecordView rec = dh.record(0);
  CHECK(rec.input_len == 1);
  CHECK(rec.tokens[0] == 4);

  // visible rows decode to distributions summing to 1
  for (std::uint32_t sym = 1; sym < 4; ++sym) {
    auto row = decode_visible_row(spec, ds.record(0), sym);
    double s = 0.0;
    for (double v : row) {
      CHECK(v >= 0.0);
      s += v;
    }
    CHECK_NEAR(s, 1.0, 1e-12);
  }
  CHECK_THROWS_AS(decode_visible_row(spec, ds.record(0), 0), std::invalid_argument);
  CHECK_THROWS_AS(decode_visible_row(spec, ds.record(0), 4), std::invalid_argument);
}

// chi-squared of observed transitions vs the decoded (quantized) matrix
static void chain_frequencies() {
  MarkovSpec spec{4, 0, 100000};
  Dataset ds = markov_generate(spec, 1, 11);
  RecordView rec = ds.record(0);

  std::vector<std::vector<double>> rows(4);
  for (std::uint32_t s = 0; s < 4; ++s) rows[s] = decode_visible_row(spec, rec, s);

  std::vector<std::vector<long>> obs(4, std::vector<long>(4, 0));
  std::vector<long> row_n(4, 0);
  for (std::size_t i = rec.input_len; i + 1 < rec.size(); ++i) {
    ++obs[rec.tokens[i]][rec.tokens[i + 1]];
    ++row_n[rec.tokens[i]];
  }

  const double crit[4] = {0.0, 6.635, 9.210, 11.345};  // chi2 upper 0.01 by dof
  for (int s = 0; s < 4; ++s) {
    double chi2 = 0.0;
    int dof = -1;
    for (int e = 0; e < 4; ++e) {
      double expect = rows[s][e] * row_n[s];
      if (rows[s][e] == 0.0) {
        CHECK(obs[s][e] == 0);  // zero-probability transitions never occur
        continue;
      }
      chi2 += (obs[s][e] - expect) * (obs[s][e] - expect) / expect;
      ++dof;
    }
    CHECK(dof >= 1);
    CHECK(chi2 < crit[dof]);
  }
}

static void determinism() {
  MarkovSpec spec{6, 2, 64};
  Dataset a = markov_generate(spec, 20, 3);
  Dataset b = markov_generate(spec, 20, 3);
  CHECK(a == b);
  CHECK(!(a == markov_generate(spec, 20, 4)));

  // distinct records sample distinct matrices
  CHECK(decode_visible_row(spec, a.record(0), 3) != decode_visible_row(spec, a.record(1), 3));

  CHECK_THROWS_AS(markov_generate(MarkovSpec{1, 0, 8}, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(markov_generate(MarkovSpec{4, 5, 8}, 1, 1), std::invalid_argument);
}

int main() {
  quantization();
  record_layout();
  chain_frequencies();
  determinism();
  return test_summary("test_markov");
}
