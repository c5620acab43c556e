#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "coaccess/date.hpp"
#include "coaccess/errors.hpp"

namespace coaccess {

/// One "user X downloaded document Y" record.
struct AccessEvent {
  std::int64_t timestamp = 0;  // seconds since Unix epoch, UTC
  std::string client_id;       // opaque token (anonymized IP or synthetic user)
  std::string doc_id;

  friend bool operator==(const AccessEvent&, const AccessEvent&) = default;
};

struct DocumentMeta {
  std::string doc_id;
  Date pub_date;

  friend bool operator==(const DocumentMeta&, const DocumentMeta&) = default;
};

using MetaMap = std::unordered_map<std::string, DocumentMeta>;

/// One citing paper's reference list. `refs` holds no duplicates and never
/// contains the citing paper itself.
struct CitationRecord {
  std::string citing_doc;
  Date citing_date;
  std::vector<std::string> refs;

  friend bool operator==(const CitationRecord&, const CitationRecord&) = default;
};

/// Rule-based crawler/proxy removal: an explicit blocklist plus a per-UTC-day
/// event cap. A client that exceeds the cap on any day is dropped entirely.
struct FilterConfig {
  std::unordered_set<std::string> blocked_clients;
  std::int64_t max_events_per_client_per_day = 500;
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = text.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(text.substr(pos));
      return out;
    }
    out.push_back(text.substr(pos, next - pos));
    pos = next + 1;
  }
}

inline bool parse_u64(std::string_view s, std::uint64_t& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

/// Strips one trailing LF (and a preceding CR, so CRLF input parses too).
inline std::string_view strip_eol(std::string_view line) {
  if (line.ends_with('\n')) line.remove_suffix(1);
  if (line.ends_with('\r')) line.remove_suffix(1);
  return line;
}

inline bool client_ts_less(const AccessEvent& a, const AccessEvent& b) {
  if (a.client_id != b.client_id) return a.client_id < b.client_id;
  return a.timestamp < b.timestamp;
}

}  // namespace detail

/// Parses one access-log record: `epoch_seconds<TAB>client_id<TAB>doc_id`.
/// A trailing newline is tolerated. `line_no` only decorates errors.
inline AccessEvent parse_access_line(std::string_view line, std::size_t line_no = 0) {
  line = detail::strip_eol(line);
  if (line.empty()) throw ParseError(line_no, "empty line");
  auto fields = detail::split(line, '\t');
  if (fields.size() != 3) {
    throw ParseError(line_no, "expected 3 tab-separated fields, got " +
                                  std::to_string(fields.size()));
  }
  std::uint64_t ts = 0;
  if (!detail::parse_u64(fields[0], ts) || ts > std::uint64_t(INT64_MAX)) {
    throw ParseError(line_no, "non-integer timestamp '" + std::string(fields[0]) + "'");
  }
  if (fields[1].empty()) throw ParseError(line_no, "empty client_id field");
  if (fields[2].empty()) throw ParseError(line_no, "empty doc_id field");
  return AccessEvent{std::int64_t(ts), std::string(fields[1]), std::string(fields[2])};
}

inline std::string format_access_line(const AccessEvent& e) {
  return std::to_string(e.timestamp) + "\t" + e.client_id + "\t" + e.doc_id;
}

inline std::vector<AccessEvent> read_access_log(std::istream& in) {
  std::vector<AccessEvent> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    out.push_back(parse_access_line(line, line_no));
  }
  return out;
}

/// Canonical event order for filter_events/sessionize: (client_id, timestamp),
/// ties kept in input order.
inline void sort_events(std::vector<AccessEvent>& events) {
  std::stable_sort(events.begin(), events.end(), detail::client_ts_less);
}

/// Drops blocklisted clients and, wholesale, every client that exceeds the
/// per-day cap on any UTC day. Input must be sorted by (client_id, timestamp);
/// relative order is preserved.
inline std::vector<AccessEvent> filter_events(std::span<const AccessEvent> events,
                                              const FilterConfig& cfg) {
  if (cfg.max_events_per_client_per_day < 1) {
    throw ContractError("filter_events: max_events_per_client_per_day must be >= 1");
  }
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (detail::client_ts_less(events[i], events[i - 1])) {
      throw ContractError("filter_events: events not sorted by (client_id, timestamp)");
    }
  }
  std::vector<AccessEvent> out;
  std::size_t i = 0;
  while (i < events.size()) {
    std::size_t j = i;
    while (j < events.size() && events[j].client_id == events[i].client_id) ++j;
    bool keep = !cfg.blocked_clients.contains(events[i].client_id);
    if (keep) {
      std::int64_t day = 0, run = 0;
      for (std::size_t k = i; k < j; ++k) {
        std::int64_t d = events[k].timestamp / 86400;
        if (k == i || d != day) {
          day = d;
          run = 0;
        }
        if (++run > cfg.max_events_per_client_per_day) {
          keep = false;
          break;
        }
      }
    }
    if (keep) out.insert(out.end(), events.begin() + i, events.begin() + j);
    i = j;
  }
  return out;
}

/// Loads `doc_id<TAB>YYYY-MM-DD` lines. Duplicate ids and malformed dates are
/// errors.
inline MetaMap load_metadata(std::istream& in) {
  MetaMap out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = detail::strip_eol(line);
    auto fields = detail::split(sv, '\t');
    if (fields.size() != 2) {
      throw ParseError(line_no, "expected 2 tab-separated fields, got " +
                                    std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw ParseError(line_no, "empty doc_id field");
    auto date = Date::parse(fields[1]);
    if (!date) {
      throw ParseError(line_no, "invalid date '" + std::string(fields[1]) + "'");
    }
    std::string doc(fields[0]);
    auto [it, inserted] = out.emplace(doc, DocumentMeta{doc, *date});
    if (!inserted) throw ParseError(line_no, "duplicate doc_id '" + doc + "'");
  }
  return out;
}

inline std::string format_metadata_line(const DocumentMeta& m) {
  return m.doc_id + "\t" + m.pub_date.to_string();
}

struct CitationWarnings {
  std::size_t duplicate_refs = 0;
  std::size_t self_refs = 0;
};

/// Loads `citing_doc<TAB>YYYY-MM-DD<TAB>ref1,ref2,...` lines. Duplicate refs
/// and self-references are removed, one warning counted per removal. An empty
/// third field is an empty reference list.
inline std::vector<CitationRecord> load_citations(std::istream& in,
                                                  CitationWarnings* warnings = nullptr) {
  std::vector<CitationRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = detail::strip_eol(line);
    auto fields = detail::split(sv, '\t');
    if (fields.size() != 3) {
      throw ParseError(line_no, "expected 3 tab-separated fields, got " +
                                    std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw ParseError(line_no, "empty citing_doc field");
    auto date = Date::parse(fields[1]);
    if (!date) {
      throw ParseError(line_no, "invalid date '" + std::string(fields[1]) + "'");
    }
    CitationRecord rec{std::string(fields[0]), *date, {}};
    if (!fields[2].empty()) {
      std::unordered_set<std::string_view> seen;
      for (std::string_view ref : detail::split(fields[2], ',')) {
        if (ref.empty()) throw ParseError(line_no, "empty ref in reference list");
        if (ref == rec.citing_doc) {
          if (warnings) ++warnings->self_refs;
          continue;
        }
        if (!seen.insert(ref).second) {
          if (warnings) ++warnings->duplicate_refs;
          continue;
        }
        rec.refs.emplace_back(ref);
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::string format_citation_line(const CitationRecord& rec) {
  std::string refs;
  for (std::size_t i = 0; i < rec.refs.size(); ++i) {
    if (i) refs += ',';
    refs += rec.refs[i];
  }
  return rec.citing_doc + "\t" + rec.citing_date.to_string() + "\t" + refs;
}

}  // namespace coaccess
