#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "coaccess/log_model.hpp"

namespace coaccess {

/// One client's deduplicated document set within an inactivity-bounded window.
/// `docs` is sorted and duplicate-free.
struct Session {
  std::string client_id;
  std::int64_t start_ts = 0;
  std::int64_t end_ts = 0;
  std::vector<std::string> docs;

  friend bool operator==(const Session&, const Session&) = default;
};

/// Groups events into sessions with the inactivity-gap rule: within one
/// client, a new session starts whenever the gap since the previous event
/// exceeds `gap_seconds`. Sessions never span clients. Input must be sorted
/// by (client_id, timestamp); output is sorted by (client_id, start_ts).
inline std::vector<Session> sessionize(std::span<const AccessEvent> events,
                                       std::int64_t gap_seconds = 1800) {
  if (gap_seconds < 0) throw ContractError("sessionize: gap_seconds must be >= 0");
  std::vector<Session> out;
  Session cur;
  bool open = false;
  auto close = [&] {
    std::sort(cur.docs.begin(), cur.docs.end());
    cur.docs.erase(std::unique(cur.docs.begin(), cur.docs.end()), cur.docs.end());
    out.push_back(std::move(cur));
    cur = Session{};
  };
  for (std::size_t i = 0; i < events.size(); ++i) {
    const AccessEvent& e = events[i];
    if (i > 0 && detail::client_ts_less(e, events[i - 1])) {
      throw ContractError("sessionize: events not sorted by (client_id, timestamp)");
    }
    bool fresh = !open || e.client_id != cur.client_id ||
                 e.timestamp - cur.end_ts > gap_seconds;
    if (fresh) {
      if (open) close();
      cur.client_id = e.client_id;
      cur.start_ts = e.timestamp;
      open = true;
    }
    cur.end_ts = e.timestamp;
    cur.docs.push_back(e.doc_id);
  }
  if (open) close();
  return out;
}

/// Session dump row: `client_id<TAB>start_ts<TAB>end_ts<TAB>docA,docB,...`
/// with docs in lexicographic order.
inline void write_sessions(std::ostream& out, std::span<const Session> sessions) {
  for (const Session& s : sessions) {
    out << s.client_id << '\t' << s.start_ts << '\t' << s.end_ts << '\t';
    for (std::size_t i = 0; i < s.docs.size(); ++i) {
      if (i) out << ',';
      out << s.docs[i];
    }
    out << '\n';
  }
}

inline std::vector<Session> read_sessions(std::istream& in) {
  std::vector<Session> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = detail::strip_eol(line);
    auto fields = detail::split(sv, '\t');
    if (fields.size() != 4) {
      throw ParseError(line_no, "expected 4 tab-separated fields, got " +
                                    std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw ParseError(line_no, "empty client_id field");
    std::uint64_t start = 0, end = 0;
    if (!detail::parse_u64(fields[1], start) || !detail::parse_u64(fields[2], end)) {
      throw ParseError(line_no, "non-integer session timestamp");
    }
    if (end < start) throw ParseError(line_no, "session end_ts precedes start_ts");
    Session s{std::string(fields[0]), std::int64_t(start), std::int64_t(end), {}};
    if (fields[3].empty()) throw ParseError(line_no, "empty document set");
    for (std::string_view doc : detail::split(fields[3], ',')) {
      if (doc.empty()) throw ParseError(line_no, "empty doc_id in document set");
      s.docs.emplace_back(doc);
    }
    std::sort(s.docs.begin(), s.docs.end());
    s.docs.erase(std::unique(s.docs.begin(), s.docs.end()), s.docs.end());
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace coaccess
