#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "coaccess/date.hpp"
#include "coaccess/errors.hpp"
#include "coaccess/log_model.hpp"
#include "coaccess/sessionizer.hpp"

namespace coaccess {

enum class IndexKind { codownload, cocitation };

inline std::string_view to_string(IndexKind kind) {
  return kind == IndexKind::codownload ? "codownload" : "cocitation";
}

inline std::optional<IndexKind> index_kind_from(std::string_view name) {
  if (name == "codownload") return IndexKind::codownload;
  if (name == "cocitation") return IndexKind::cocitation;
  return std::nullopt;
}

/// First-month announcement-bias correction (new papers are listed together,
/// so their co-access says little about topical relatedness).
struct DebiasConfig {
  bool enabled = true;
  int window_days = 30;
};

struct IndexEntry {
  std::string doc_a;  // doc_a < doc_b lexicographically
  std::string doc_b;
  std::uint64_t count = 0;

  friend bool operator==(const IndexEntry&, const IndexEntry&) = default;
};

namespace detail {
struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view sv) const {
    return std::hash<std::string_view>{}(sv);
  }
};
}  // namespace detail

/// Sparse symmetric counts over unordered document pairs. Document ids are
/// interned; a pair is stored once under a canonical key, so symmetry is
/// structural: lookup(a,b) == lookup(b,a) by construction. Zero-count pairs
/// are never stored and self-pairs are rejected. Once built, an index is
/// immutable in practice and safe for concurrent reads; merge_from is the
/// only cross-shard synchronization point when counting in parallel.
class CoOccurrenceIndex {
 public:
  explicit CoOccurrenceIndex(IndexKind kind = IndexKind::codownload) : kind_(kind) {}

  IndexKind kind() const { return kind_; }
  std::size_t pair_count() const { return counts_.size(); }
  bool empty() const { return counts_.empty(); }

  void add(std::string_view a, std::string_view b, std::uint64_t n = 1) {
    if (a == b) throw ContractError("co-occurrence pair must join two distinct documents");
    if (n == 0) return;
    std::uint32_t ia = intern(a);
    std::uint32_t ib = intern(b);
    counts_[pack(ia, ib)] += n;
  }

  std::uint64_t lookup(std::string_view a, std::string_view b) const {
    auto ia = find_id(a);
    auto ib = find_id(b);
    if (!ia || !ib || *ia == *ib) return 0;
    auto it = counts_.find(pack(*ia, *ib));
    return it == counts_.end() ? 0 : it->second;
  }

  /// Visits every stored pair as fn(doc_a, doc_b, count) with
  /// doc_a < doc_b lexicographically. Views are valid only during the call.
  /// Visit order is unspecified; callers needing an order sort afterwards.
  template <class Fn>
  void for_each_pair(Fn&& fn) const {
    for (const auto& [key, count] : counts_) {
      std::string_view a = docs_[std::uint32_t(key >> 32)];
      std::string_view b = docs_[std::uint32_t(key)];
      if (b < a) std::swap(a, b);
      fn(a, b, count);
    }
  }

  /// Visits every partner of `doc` as fn(partner, count).
  template <class Fn>
  void for_each_partner(std::string_view doc, Fn&& fn) const {
    auto id = find_id(doc);
    if (!id) return;
    for (const auto& [key, count] : counts_) {
      std::uint32_t hi = std::uint32_t(key >> 32);
      std::uint32_t lo = std::uint32_t(key);
      if (hi == *id) {
        fn(std::string_view(docs_[lo]), count);
      } else if (lo == *id) {
        fn(std::string_view(docs_[hi]), count);
      }
    }
  }

  /// All pairs, sorted by (doc_a, doc_b); the serialization order.
  std::vector<IndexEntry> entries_sorted() const {
    std::vector<IndexEntry> out;
    out.reserve(counts_.size());
    for_each_pair([&](std::string_view a, std::string_view b, std::uint64_t count) {
      out.push_back(IndexEntry{std::string(a), std::string(b), count});
    });
    std::sort(out.begin(), out.end(), [](const IndexEntry& x, const IndexEntry& y) {
      if (x.doc_a != y.doc_a) return x.doc_a < y.doc_a;
      return x.doc_b < y.doc_b;
    });
    return out;
  }

  /// Pointwise addition of another index of the same kind.
  void merge_from(const CoOccurrenceIndex& other) {
    if (other.kind_ != kind_) {
      throw ContractError("merge: index kind mismatch");
    }
    other.for_each_pair([&](std::string_view a, std::string_view b, std::uint64_t count) {
      add(a, b, count);
    });
  }

  friend bool operator==(const CoOccurrenceIndex& x, const CoOccurrenceIndex& y) {
    return x.kind_ == y.kind_ && x.entries_sorted() == y.entries_sorted();
  }

 private:
  static std::uint64_t pack(std::uint32_t x, std::uint32_t y) {
    if (x > y) std::swap(x, y);
    return (std::uint64_t(x) << 32) | y;
  }

  std::uint32_t intern(std::string_view doc) {
    auto it = ids_.find(doc);
    if (it != ids_.end()) return it->second;
    docs_.emplace_back(doc);
    std::uint32_t id = std::uint32_t(docs_.size() - 1);
    ids_.emplace(docs_.back(), id);
    return id;
  }

  std::optional<std::uint32_t> find_id(std::string_view doc) const {
    auto it = ids_.find(doc);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  IndexKind kind_;
  std::vector<std::string> docs_;
  std::unordered_map<std::string, std::uint32_t, detail::StringHash, std::equal_to<>> ids_;
  std::unordered_map<std::uint64_t, std::uint64_t> counts_;
};

/// Counts each unordered pair of distinct documents once per session. With
/// debiasing enabled, a pair is skipped when the session starts while BOTH
/// documents are still within `window_days` of publication — the two papers
/// "appeared together" as recent announcements, so the co-access is presumed
/// presentation bias rather than topical interest.
inline CoOccurrenceIndex count_codownloads(std::span<const Session> sessions,
                                           const MetaMap& meta,
                                           const DebiasConfig& debias = {}) {
  if (debias.window_days < 0) {
    throw ContractError("count_codownloads: window_days must be >= 0");
  }
  CoOccurrenceIndex index(IndexKind::codownload);
  std::vector<char> fresh;
  const std::int64_t window_seconds = std::int64_t(debias.window_days) * 86400;
  for (const Session& s : sessions) {
    if (debias.enabled) {
      fresh.assign(s.docs.size(), 0);
      for (std::size_t i = 0; i < s.docs.size(); ++i) {
        auto it = meta.find(s.docs[i]);
        if (it == meta.end()) throw MissingMetadataError(s.docs[i]);
        fresh[i] = s.start_ts < it->second.pub_date.epoch_seconds() + window_seconds;
      }
    }
    for (std::size_t i = 0; i < s.docs.size(); ++i) {
      for (std::size_t j = i + 1; j < s.docs.size(); ++j) {
        if (debias.enabled && fresh[i] && fresh[j]) continue;
        index.add(s.docs[i], s.docs[j]);
      }
    }
  }
  return index;
}

/// Counts each unordered pair of distinct references once per citing paper.
/// With a cutoff, only records dated strictly before it contribute.
inline CoOccurrenceIndex count_cocitations(std::span<const CitationRecord> citations,
                                           std::optional<Date> cutoff = {}) {
  CoOccurrenceIndex index(IndexKind::cocitation);
  for (const CitationRecord& rec : citations) {
    if (cutoff && !(rec.citing_date < *cutoff)) continue;
    for (std::size_t i = 0; i < rec.refs.size(); ++i) {
      for (std::size_t j = i + 1; j < rec.refs.size(); ++j) {
        index.add(rec.refs[i], rec.refs[j]);
      }
    }
  }
  return index;
}

inline CoOccurrenceIndex merge(const CoOccurrenceIndex& a, const CoOccurrenceIndex& b) {
  CoOccurrenceIndex out = a;
  out.merge_from(b);
  return out;
}

/// Index file: `#coindex<TAB>kind=<codownload|cocitation>` header, then
/// `doc_a<TAB>doc_b<TAB>count` rows sorted by (doc_a, doc_b). Byte-exact
/// reproducible for a given index.
inline void write_index(const CoOccurrenceIndex& index, std::ostream& out) {
  out << "#coindex\tkind=" << to_string(index.kind()) << '\n';
  for (const IndexEntry& e : index.entries_sorted()) {
    out << e.doc_a << '\t' << e.doc_b << '\t' << e.count << '\n';
  }
}

inline CoOccurrenceIndex read_index(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing #coindex header");
  std::string_view header = detail::strip_eol(line);
  constexpr std::string_view prefix = "#coindex\tkind=";
  if (!header.starts_with(prefix)) throw ParseError(1, "missing #coindex header");
  auto kind = index_kind_from(header.substr(prefix.size()));
  if (!kind) {
    throw ParseError(1, "unknown index kind '" +
                            std::string(header.substr(prefix.size())) + "'");
  }
  CoOccurrenceIndex index(*kind);
  std::size_t line_no = 1;
  std::string prev_a, prev_b;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = detail::strip_eol(line);
    auto fields = detail::split(sv, '\t');
    if (fields.size() != 3) {
      throw ParseError(line_no, "expected 3 tab-separated fields, got " +
                                    std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty()) {
      throw ParseError(line_no, "empty doc_id field");
    }
    if (!(fields[0] < fields[1])) {
      throw ParseError(line_no, "pair not in lexicographic order");
    }
    std::uint64_t count = 0;
    if (!detail::parse_u64(fields[2], count) || count == 0) {
      throw ParseError(line_no, "count must be a positive integer, got '" +
                                    std::string(fields[2]) + "'");
    }
    if (!prev_a.empty() &&
        !(std::pair(std::string_view(prev_a), std::string_view(prev_b)) <
          std::pair(fields[0], fields[1]))) {
      throw ParseError(line_no, "rows not sorted by (doc_a, doc_b)");
    }
    prev_a = fields[0];
    prev_b = fields[1];
    index.add(fields[0], fields[1], count);
  }
  return index;
}

}  // namespace coaccess
