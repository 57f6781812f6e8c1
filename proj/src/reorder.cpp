#include "epimeter/reorder.hpp"

#include <stdexcept>
#include <string>

namespace epimeter {

Dataset reorder(const Dataset& ds, Direction dir) {
  if (dir == Direction::forward) return ds;
  Dataset out;
  out.vocab_size = ds.vocab_size;
  const std::string tag = "#rev";
  if (ds.provenance.size() >= tag.size() &&
      ds.provenance.compare(ds.provenance.size() - tag.size(), tag.size(), tag) == 0)
    out.provenance = ds.provenance.substr(0, ds.provenance.size() - tag.size());
  else
    out.provenance = ds.provenance + tag;
  out.tokens.reserve(ds.tokens.size());
  out.mask.reserve(ds.mask.size());
  out.roles.reserve(ds.roles.size());
  out.offsets.reserve(ds.offsets.size());
  for (std::size_t r = 0; r < ds.record_count(); ++r) {
    RecordView rec = ds.record(r);
    const std::size_t a = rec.input_len;        // old input block length
    const std::size_t b = rec.size() - a;       // old target block length
    if (a == 0 || b == 0)
      throw std::invalid_argument("reorder: record " + std::to_string(r) +
                                  " lacks two nonempty role blocks");
    for (std::size_t i = 0; i < b; ++i) {
      out.tokens.push_back(rec.tokens[a + i]);
      out.mask.push_back(0);
      out.roles.push_back(kRoleInput);
    }
    for (std::size_t i = 0; i < a; ++i) {
      out.tokens.push_back(rec.tokens[i]);
      out.mask.push_back(1);
      out.roles.push_back(kRoleTarget);
    }
    out.offsets.push_back(out.tokens.size());
  }
  out.validate();
  return out;
}

}  // namespace epimeter
