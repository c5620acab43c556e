#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "coaccess/co_occurrence.hpp"

namespace coaccess {

struct RecommendationItem {
  std::string doc_id;
  std::uint64_t strength = 0;

  friend bool operator==(const RecommendationItem&, const RecommendationItem&) = default;
};

/// Ranked related-paper list for one query document. Strengths are
/// non-increasing; ties are broken by ascending doc_id, so the list is a
/// deterministic function of the index.
struct RecommendationList {
  std::string query_doc;
  std::vector<RecommendationItem> items;

  friend bool operator==(const RecommendationList&, const RecommendationList&) = default;
};

/// All documents with a nonzero pair count with `doc`, sorted by
/// (count descending, doc_id ascending), truncated to `cap`. A document
/// absent from the index yields an empty list — the coverage-gap case, not
/// an error.
inline RecommendationList recommend(const CoOccurrenceIndex& index, std::string_view doc,
                                    std::size_t cap = 100) {
  if (cap < 1) throw ContractError("recommend: cap must be >= 1");
  RecommendationList out{std::string(doc), {}};
  index.for_each_partner(doc, [&](std::string_view partner, std::uint64_t count) {
    out.items.push_back(RecommendationItem{std::string(partner), count});
  });
  std::sort(out.items.begin(), out.items.end(),
            [](const RecommendationItem& a, const RecommendationItem& b) {
              if (a.strength != b.strength) return a.strength > b.strength;
              return a.doc_id < b.doc_id;
            });
  if (out.items.size() > cap) out.items.resize(cap);
  return out;
}

/// Largest pair count between `doc` and any other document; 0 when `doc` has
/// no partners (or is unknown).
inline std::uint64_t max_strength(const CoOccurrenceIndex& index, std::string_view doc) {
  std::uint64_t best = 0;
  index.for_each_partner(doc, [&](std::string_view, std::uint64_t count) {
    best = std::max(best, count);
  });
  return best;
}

/// Dump rows: `query_doc<TAB>rank<TAB>doc<TAB>strength`, rank starting at 1.
inline void write_recommendations(std::ostream& out, const RecommendationList& list) {
  for (std::size_t i = 0; i < list.items.size(); ++i) {
    out << list.query_doc << '\t' << (i + 1) << '\t' << list.items[i].doc_id << '\t'
        << list.items[i].strength << '\n';
  }
}

}  // namespace coaccess
