#include "epimeter/markov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "epimeter/rng.hpp"

namespace epimeter {

void MarkovSpec::validate() const {
  if (vocab < 2) throw std::invalid_argument("vocab must be >= 2");
  if (hidden_rows > vocab) throw std::invalid_argument("hidden_rows must be <= vocab");
  if (seq_len < 1) throw std::invalid_argument("seq_len must be >= 1");
}

std::uint32_t markov_digits_per_entry(std::uint32_t vocab) {
  std::uint32_t d = 1;
  std::uint64_t cap = vocab;
  while (cap < 256) {
    cap *= vocab;
    ++d;
  }
  return d;
}

std::vector<int> quantize_row(const std::vector<double>& row) {
  const int Q = kMarkovQuantDenominator;
  const std::size_t k = row.size();
  std::vector<int> q(k);
  std::vector<double> frac(k);
  int assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double scaled = row[i] * Q;
    q[i] = static_cast<int>(std::floor(scaled));
    frac[i] = scaled - q[i];
    assigned += q[i];
  }
  // largest remainder; ties broken by lower index for determinism
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (int i = 0; i < Q - assigned; ++i) q[idx[i % k]] += 1;
  return q;
}

std::vector<double> dequantize_row(const std::vector<int>& q) {
  std::vector<double> row(q.size());
  for (std::size_t i = 0; i < q.size(); ++i)
    row[i] = static_cast<double>(q[i]) / kMarkovQuantDenominator;
  return row;
}

namespace {

struct Layout {
  std::uint32_t digits;      // per entry
  std::size_t input_len;     // visible rows + separator
  std::size_t rec_len;
};

Layout layout_of(const MarkovSpec& s) {
  Layout L;
  L.digits = markov_digits_per_entry(s.vocab);
  const std::size_t visible = s.vocab - s.hidden_rows;
  L.input_len = visible * s.vocab * L.digits + 1;  // +1 separator
  L.rec_len = L.input_len + s.seq_len;
  return L;
}

void make_record(const MarkovSpec& spec, std::uint64_t rec_seed, Token* toks,
                 std::uint8_t* msk, std::uint8_t* rls) {
  const Layout L = layout_of(spec);
  const std::uint32_t V = spec.vocab;
  SplitMix64 rng(rec_seed);

  // sample + quantize the full matrix
  std::vector<std::vector<int>> qrows(V);
  std::vector<std::vector<double>> rows(V);
  for (std::uint32_t s = 0; s < V; ++s) {
    qrows[s] = quantize_row(dirichlet1(rng, V));
    rows[s] = dequantize_row(qrows[s]);
  }

  // serialize visible rows as big-endian base-V digits of each entry
  std::size_t p = 0;
  for (std::uint32_t s = spec.hidden_rows; s < V; ++s) {
    for (std::uint32_t e = 0; e < V; ++e) {
      int v = qrows[s][e];
      for (std::uint32_t d = 0; d < L.digits; ++d) {
        const std::uint32_t shift = L.digits - 1 - d;
        std::uint64_t div = 1;
        for (std::uint32_t j = 0; j < shift; ++j) div *= V;
        toks[p + d] = static_cast<Token>((v / div) % V);
      }
      p += L.digits;
    }
  }
  toks[p++] = static_cast<Token>(V);  // separator
  for (std::size_t i = 0; i < L.input_len; ++i) {
    msk[i] = 0;
    rls[i] = kRoleInput;
  }

  // chain from the quantized matrix; start symbol uniform
  std::uint32_t s = static_cast<std::uint32_t>(rng.next_below(V));
  for (std::uint32_t t = 0; t < spec.seq_len; ++t) {
    toks[p] = static_cast<Token>(s);
    msk[p] = 1;
    rls[p] = kRoleTarget;
    ++p;
    s = static_cast<std::uint32_t>(sample_index(rows[s], rng.next_double()));
  }
}

}  // namespace

Dataset markov_generate(const MarkovSpec& spec, std::size_t count, std::uint64_t seed,
                        bool parallel) {
  spec.validate();
  if (count < 1) throw std::invalid_argument("count must be >= 1");
  const Layout L = layout_of(spec);
  Dataset ds;
  ds.vocab_size = spec.vocab + 1;
  ds.provenance = "markov:V=" + std::to_string(spec.vocab) +
                  ",h=" + std::to_string(spec.hidden_rows) +
                  ",n=" + std::to_string(spec.seq_len) + ":seed=" + std::to_string(seed);
  ds.tokens.resize(count * L.rec_len);
  ds.mask.resize(count * L.rec_len);
  ds.roles.resize(count * L.rec_len);
  ds.offsets.resize(count + 1);
  for (std::size_t r = 0; r <= count; ++r) ds.offsets[r] = r * L.rec_len;

#ifdef EPIMETER_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
  for (long long r = 0; r < static_cast<long long>(count); ++r) {
    const std::size_t base = static_cast<std::size_t>(r) * L.rec_len;
    make_record(spec, derive_seed(seed, static_cast<std::uint64_t>(r)),
                ds.tokens.data() + base, ds.mask.data() + base, ds.roles.data() + base);
  }
  (void)parallel;
  return ds;
}

std::vector<double> decode_visible_row(const MarkovSpec& spec, const RecordView& rec,
                                       std::uint32_t sym) {
  if (sym < spec.hidden_rows || sym >= spec.vocab)
    throw std::invalid_argument("row is hidden or out of range");
  const std::uint32_t digits = markov_digits_per_entry(spec.vocab);
  const std::size_t row_base =
      static_cast<std::size_t>(sym - spec.hidden_rows) * spec.vocab * digits;
  std::vector<int> q(spec.vocab);
  for (std::uint32_t e = 0; e < spec.vocab; ++e) {
    std::uint64_t v = 0;
    for (std::uint32_t d = 0; d < digits; ++d)
      v = v * spec.vocab + rec.tokens[row_base + e * digits + d];
    q[e] = static_cast<int>(v);
  }
  return dequantize_row(q);
}

}  // namespace epimeter
