#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "coaccess/co_occurrence.hpp"
#include "coaccess/date.hpp"
#include "coaccess/errors.hpp"
#include "coaccess/log_model.hpp"
#include "coaccess/recommender.hpp"
#include "coaccess/sessionizer.hpp"

namespace coaccess {

/// One leave-one-out relevance judgment: `query_doc` was cited alongside the
/// `relevant` documents by a post-cutoff paper; `age_months` is how old the
/// query document was at that moment.
struct EvalQuery {
  std::string query_doc;
  std::vector<std::string> relevant;  // sorted, unique, never contains query_doc
  int age_months = 0;

  friend bool operator==(const EvalQuery&, const EvalQuery&) = default;
};

/// One aggregated point of a plottable curve: `x` is an age bin (months) or a
/// rank, `y` the aggregated value, `n` how many samples went into it.
struct CurvePoint {
  std::int64_t x = 0;
  double y = 0.0;
  std::size_t n = 0;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

/// Standard average precision: the mean, over the ranks of retrieved relevant
/// documents, of precision at that rank, divided by |relevant|. Relevant
/// documents missing from `ranked` contribute zero. `ranked` must be
/// duplicate-free; an empty relevant set has no defined AP and is an error.
inline double average_precision(std::span<const std::string> ranked,
                                std::span<const std::string> relevant) {
  std::unordered_set<std::string_view> rel(relevant.begin(), relevant.end());
  if (rel.empty()) throw ContractError("average_precision: relevant set is empty");
  std::unordered_set<std::string_view> seen;
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (!seen.insert(ranked[k]).second) {
      throw ContractError("average_precision: ranked list contains duplicates");
    }
    if (rel.contains(ranked[k])) {
      ++hits;
      sum += double(hits) / double(k + 1);
    }
  }
  return sum / double(rel.size());
}

struct EvalWarnings {
  std::size_t missing_meta = 0;  // queries skipped: query doc absent from metadata
};

/// Builds leave-one-out queries from post-cutoff reference lists: every record
/// with citing_date >= cutoff and at least two in-corpus refs yields one query
/// per in-corpus ref, with the remaining refs as its relevant set. Queries
/// whose document would have negative age are dropped.
inline std::vector<EvalQuery> build_eval_queries(
    std::span<const CitationRecord> citations, const MetaMap& meta, const Date& cutoff,
    const std::unordered_set<std::string>& corpus, EvalWarnings* warnings = nullptr) {
  std::vector<EvalQuery> out;
  std::vector<std::string> in_corpus;
  for (const CitationRecord& rec : citations) {
    if (rec.citing_date < cutoff) continue;
    in_corpus.clear();
    for (const std::string& ref : rec.refs) {
      if (corpus.contains(ref)) in_corpus.push_back(ref);
    }
    if (in_corpus.size() < 2) continue;
    for (const std::string& query_doc : in_corpus) {
      auto it = meta.find(query_doc);
      if (it == meta.end()) {
        if (warnings) ++warnings->missing_meta;
        continue;
      }
      int age = months_between(it->second.pub_date, rec.citing_date);
      if (age < 0) continue;
      EvalQuery q{query_doc, {}, age};
      for (const std::string& other : in_corpus) {
        if (other != query_doc) q.relevant.push_back(other);
      }
      std::sort(q.relevant.begin(), q.relevant.end());
      out.push_back(std::move(q));
    }
  }
  return out;
}

/// Mean AP per age bin over the capped recommendation lists; bins ascending,
/// empty bins omitted.
inline std::vector<CurvePoint> map_over_age(const CoOccurrenceIndex& index,
                                            std::span<const EvalQuery> queries,
                                            std::size_t cap = 100) {
  std::map<int, std::pair<double, std::size_t>> bins;
  std::vector<std::string> ranked;
  for (const EvalQuery& q : queries) {
    RecommendationList rec = recommend(index, q.query_doc, cap);
    ranked.clear();
    for (const RecommendationItem& item : rec.items) ranked.push_back(item.doc_id);
    double ap = average_precision(ranked, q.relevant);
    auto& [sum, n] = bins[q.age_months];
    sum += ap;
    ++n;
  }
  std::vector<CurvePoint> out;
  out.reserve(bins.size());
  for (const auto& [bin, acc] : bins) {
    out.push_back(CurvePoint{bin, acc.first / double(acc.second), acc.second});
  }
  return out;
}

/// Per-document maximum pair strength over the whole corpus, sorted
/// descending. Documents the index has never seen appear as zeros, so the
/// result always has exactly |corpus| values.
inline std::vector<std::uint64_t> coverage_distribution(const CoOccurrenceIndex& index,
                                                        std::span<const std::string> corpus) {
  std::unordered_map<std::string_view, std::uint64_t> best;
  best.reserve(corpus.size());
  index.for_each_pair([&](std::string_view a, std::string_view b, std::uint64_t count) {
    auto& ba = best[a];
    ba = std::max(ba, count);
    auto& bb = best[b];
    bb = std::max(bb, count);
  });
  std::vector<std::uint64_t> out;
  out.reserve(corpus.size());
  for (const std::string& doc : corpus) {
    auto it = best.find(doc);
    out.push_back(it == best.end() ? 0 : it->second);
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

namespace detail {

// One timed co-occurrence group: a session (time = start_ts) or a reference
// list (time = citing date, midnight UTC).
struct TimedGroup {
  std::int64_t time = 0;
  std::span<const std::string> docs;
};

inline std::vector<TimedGroup> timed_groups(std::span<const Session> sessions,
                                            std::span<const CitationRecord> citations,
                                            IndexKind mode) {
  std::vector<TimedGroup> groups;
  if (mode == IndexKind::codownload) {
    groups.reserve(sessions.size());
    for (const Session& s : sessions) groups.push_back({s.start_ts, s.docs});
  } else {
    groups.reserve(citations.size());
    for (const CitationRecord& r : citations) {
      groups.push_back({r.citing_date.epoch_seconds(), r.refs});
    }
  }
  std::stable_sort(groups.begin(), groups.end(),
                   [](const TimedGroup& a, const TimedGroup& b) { return a.time < b.time; });
  return groups;
}

}  // namespace detail

/// Cumulative distinct-partner counts per document. For document d, element
/// i-1 (bin i) is the number of distinct partners co-occurring with d in data
/// timed strictly before pub_date(d) + i*bin_months months, capped at `cap`.
/// All documents in `meta` get a series; every series has the same length,
/// one bin past the last data item for the slowest-aging document. Series are
/// non-decreasing by construction.
inline std::map<std::string, std::vector<std::uint64_t>> recs_over_age_series(
    std::span<const Session> sessions, std::span<const CitationRecord> citations,
    const MetaMap& meta, IndexKind mode, std::size_t cap = 100, int bin_months = 1) {
  if (bin_months < 1) throw ContractError("recs_over_age: bin_months must be >= 1");
  std::map<std::string, std::vector<std::uint64_t>> out;
  if (meta.empty()) return out;
  auto groups = detail::timed_groups(sessions, citations, mode);
  if (groups.empty()) return out;
  const std::int64_t end_time = groups.back().time;

  // Stream data in time order; record when each document first sees each
  // partner. Append order per document is therefore non-decreasing in time.
  std::unordered_map<std::string_view, std::size_t> slot;
  std::vector<std::unordered_set<std::string_view>> partners;
  std::vector<std::vector<std::int64_t>> first_seen;
  auto slot_of = [&](std::string_view doc) {
    auto [it, inserted] = slot.emplace(doc, partners.size());
    if (inserted) {
      if (!meta.contains(std::string(doc))) throw MissingMetadataError(std::string(doc));
      partners.emplace_back();
      first_seen.emplace_back();
    }
    return it->second;
  };
  for (const auto& group : groups) {
    for (std::size_t i = 0; i < group.docs.size(); ++i) {
      for (std::size_t j = i + 1; j < group.docs.size(); ++j) {
        std::string_view a = group.docs[i];
        std::string_view b = group.docs[j];
        if (a == b) continue;
        std::size_t sa = slot_of(a);
        std::size_t sb = slot_of(b);
        if (partners[sa].insert(b).second) first_seen[sa].push_back(group.time);
        if (partners[sb].insert(a).second) first_seen[sb].push_back(group.time);
      }
    }
  }

  // Every document ages until its bin boundary passes the last data item.
  std::size_t max_bins = 1;
  for (const auto& [doc, doc_meta] : meta) {
    std::size_t bins = 1;
    while (doc_meta.pub_date.add_months(int(bins) * bin_months).epoch_seconds() <=
           end_time) {
      ++bins;
    }
    max_bins = std::max(max_bins, bins);
  }

  for (const auto& [doc, doc_meta] : meta) {
    std::span<const std::int64_t> times;
    auto it = slot.find(doc);
    if (it != slot.end()) times = first_seen[it->second];
    std::vector<std::uint64_t> series(max_bins, 0);
    std::size_t covered = 0;
    for (std::size_t bin = 1; bin <= max_bins; ++bin) {
      std::int64_t boundary =
          doc_meta.pub_date.add_months(int(bin) * bin_months).epoch_seconds();
      while (covered < times.size() && times[covered] < boundary) ++covered;
      series[bin - 1] = std::min<std::uint64_t>(covered, cap);
    }
    out.emplace(doc, std::move(series));
  }
  return out;
}

/// Mean distinct-partner count per age bin over all documents (the growth
/// curve of how quickly each measure accumulates recommendations).
/// x = months after publication at the bin boundary, n = |corpus|.
inline std::vector<CurvePoint> recs_over_age(std::span<const Session> sessions,
                                             std::span<const CitationRecord> citations,
                                             const MetaMap& meta, IndexKind mode,
                                             std::size_t cap = 100, int bin_months = 1) {
  auto series = recs_over_age_series(sessions, citations, meta, mode, cap, bin_months);
  std::vector<CurvePoint> out;
  if (series.empty()) return out;
  std::size_t bins = series.begin()->second.size();
  out.resize(bins);
  for (std::size_t bin = 0; bin < bins; ++bin) {
    double sum = 0.0;
    for (const auto& [doc, counts] : series) sum += double(counts[bin]);
    out[bin] = CurvePoint{std::int64_t(bin + 1) * bin_months, sum / double(series.size()),
                          series.size()};
  }
  return out;
}

/// Curve file contract: CSV `bin,value,n`, one point per row.
inline void write_curve_csv(std::ostream& out, std::span<const CurvePoint> curve) {
  out << "bin,value,n\n";
  char buf[64];
  for (const CurvePoint& p : curve) {
    std::snprintf(buf, sizeof(buf), "%.10g", p.y);
    out << p.x << ',' << buf << ',' << p.n << '\n';
  }
}

/// Coverage file contract: CSV `rank,max_count`, ranks from 1, counts
/// descending.
inline void write_coverage_csv(std::ostream& out, std::span<const std::uint64_t> coverage) {
  out << "rank,max_count\n";
  for (std::size_t i = 0; i < coverage.size(); ++i) {
    out << (i + 1) << ',' << coverage[i] << '\n';
  }
}

}  // namespace coaccess
