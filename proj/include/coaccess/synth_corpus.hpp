#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "coaccess/date.hpp"
#include "coaccess/errors.hpp"
#include "coaccess/log_model.hpp"

namespace coaccess {

/// Knobs for the seeded corpus generator. Defaults target seconds-level
/// runtimes while still exhibiting the structure the pipeline is meant to
/// recover: topical sessions, citations concentrated within topics, and an
/// optional same-month co-access burst that the debias filter should erase.
struct GenConfig {
  std::uint64_t seed = 0;
  int n_topics = 20;
  int n_docs = 200;
  int n_users = 500;
  int n_sessions = 5000;
  int docs_per_session = 4;       // mean documents per session
  double p_intra_topic = 0.9;     // chance a session/reference list stays in one topic
  double citation_rate = 3.0;     // expected refs per potential citing paper
  bool announcement_burst = false;
  int time_span_months = 24;
  int cutoff_month = 12;          // start of the evaluation period
  Date base_date = Date(2004, 1, 1);

  Date cutoff_date() const { return base_date.add_months(cutoff_month); }
  Date span_end() const { return base_date.add_months(time_span_months); }
};

/// Ground-truth topic assignment for every generated document.
struct TopicOracle {
  std::unordered_map<std::string, int> topic_of;
  std::vector<std::vector<std::string>> members;  // doc ids per topic, id order
};

/// All other documents sharing `doc`'s topic. Unknown documents are an error.
inline std::vector<std::string> oracle_relevant(const TopicOracle& oracle,
                                                std::string_view doc) {
  auto it = oracle.topic_of.find(std::string(doc));
  if (it == oracle.topic_of.end()) {
    throw ContractError("oracle_relevant: unknown document '" + std::string(doc) + "'");
  }
  std::vector<std::string> out;
  for (const std::string& member : oracle.members[std::size_t(it->second)]) {
    if (member != doc) out.push_back(member);
  }
  return out;
}

namespace detail {

// All sampling goes through mt19937_64 with hand-rolled derivations, so a
// given seed yields the same corpus on any standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw ContractError("Rng::below: n must be positive");
    // rejection sampling keeps the draw unbiased
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  std::int64_t range(std::int64_t lo, std::int64_t hi) {  // inclusive
    return lo + std::int64_t(below(std::uint64_t(hi - lo + 1)));
  }

  double unit() { return double(engine_() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return unit() < p; }

  int poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    double limit = std::exp(-lambda);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= unit();
    } while (p > limit);
    return k - 1;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[std::size_t(below(i))]);
    }
  }

  /// k distinct indices out of [0, n), in draw order.
  std::vector<std::size_t> distinct_indices(std::size_t n, std::size_t k) {
    std::vector<std::size_t> out;
    out.reserve(k);
    std::unordered_set<std::size_t> used;
    while (out.size() < k) {
      std::size_t idx = std::size_t(below(n));
      if (used.insert(idx).second) out.push_back(idx);
    }
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

inline std::string doc_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "d%06d", i + 1);
  return buf;
}

}  // namespace detail

/// An in-memory generated corpus: the three pipeline inputs plus the oracle.
/// Events are sorted by time, metadata by doc id, citations by date.
struct GeneratedCorpus {
  std::vector<DocumentMeta> docs;
  std::vector<AccessEvent> events;
  std::vector<CitationRecord> citations;
  TopicOracle oracle;
};

inline void validate(const GenConfig& cfg) {
  auto fail = [](const std::string& what) { throw ContractError("generate: " + what); };
  if (cfg.n_topics < 1) fail("n_topics must be >= 1");
  if (cfg.n_docs < 1) fail("n_docs must be >= 1");
  if (cfg.n_topics > cfg.n_docs) fail("n_topics must not exceed n_docs");
  if (cfg.n_users < 1) fail("n_users must be >= 1");
  if (cfg.n_sessions < 1) fail("n_sessions must be >= 1");
  if (cfg.docs_per_session < 1) fail("docs_per_session must be >= 1");
  if (cfg.docs_per_session > cfg.n_docs) fail("docs_per_session exceeds n_docs");
  if (cfg.p_intra_topic < 0.0 || cfg.p_intra_topic > 1.0) {
    fail("p_intra_topic must be within [0, 1]");
  }
  if (cfg.citation_rate < 0.0) fail("citation_rate must be >= 0");
  if (cfg.time_span_months < 1) fail("time_span_months must be >= 1");
  if (cfg.cutoff_month < 1 || cfg.cutoff_month >= cfg.time_span_months) {
    fail("cutoff_month must be in [1, time_span_months)");
  }
}

/// Deterministic corpus generation. Each output draws from its own stream
/// derived from the master seed, so e.g. toggling bursts never shifts the
/// organic sessions or the citations.
inline GeneratedCorpus generate(const GenConfig& cfg) {
  validate(cfg);
  GeneratedCorpus corpus;
  const std::int64_t span_last_second = cfg.span_end().epoch_seconds() - 1;

  // Documents: round-robin topics, publication dates spread over the span.
  // Days stay within 1..28 so every same-month pair leaves room for a
  // co-access inside both documents' first 30 days.
  detail::Rng doc_rng(cfg.seed ^ 0x646f637355ULL);
  corpus.oracle.members.resize(std::size_t(cfg.n_topics));
  corpus.docs.reserve(std::size_t(cfg.n_docs));
  for (int i = 0; i < cfg.n_docs; ++i) {
    std::string id = detail::doc_name(i);
    int month = int(doc_rng.below(std::uint64_t(cfg.time_span_months)));
    int day = 1 + int(doc_rng.below(28));
    Date pub = cfg.base_date.add_months(month).add_days(day - 1);
    corpus.docs.push_back(DocumentMeta{id, pub});
    int topic = i % cfg.n_topics;
    corpus.oracle.topic_of.emplace(id, topic);
    corpus.oracle.members[std::size_t(topic)].push_back(id);
  }

  std::vector<std::vector<std::size_t>> by_topic(std::size_t(cfg.n_topics));
  for (int i = 0; i < cfg.n_docs; ++i) {
    by_topic[std::size_t(i % cfg.n_topics)].push_back(std::size_t(i));
  }

  // Organic sessions: mostly single-topic document sets; the session start is
  // drawn after every selected document exists.
  detail::Rng session_rng(cfg.seed ^ 0x73657373ULL);
  std::vector<std::size_t> all_docs(std::size_t(cfg.n_docs));
  for (std::size_t i = 0; i < all_docs.size(); ++i) all_docs[i] = i;
  for (int s = 0; s < cfg.n_sessions; ++s) {
    char user[16];
    std::snprintf(user, sizeof(user), "u%06d",
                  int(session_rng.below(std::uint64_t(cfg.n_users))) + 1);
    const std::vector<std::size_t>& pool =
        session_rng.chance(cfg.p_intra_topic)
            ? by_topic[std::size_t(session_rng.below(std::uint64_t(cfg.n_topics)))]
            : all_docs;
    std::size_t k = 1 + std::size_t(session_rng.poisson(double(cfg.docs_per_session) - 1.0));
    k = std::min({k, pool.size(), std::size_t(50)});
    auto picks = session_rng.distinct_indices(pool.size(), k);
    std::int64_t earliest = 0;
    for (std::size_t p : picks) {
      earliest = std::max(earliest, corpus.docs[pool[p]].pub_date.epoch_seconds());
    }
    std::int64_t start = session_rng.range(earliest, span_last_second);
    for (std::size_t i = 0; i < picks.size(); ++i) {
      corpus.events.push_back(AccessEvent{start + std::int64_t(i) * 30, user,
                                          corpus.docs[pool[picks[i]]].doc_id});
    }
  }

  // Announcement bursts: dedicated one-shot clients co-access same-month
  // pairs while both papers are under 30 days old. These sessions model the
  // new-submissions listing traffic the debias rule is meant to cancel.
  if (cfg.announcement_burst) {
    detail::Rng burst_rng(cfg.seed ^ 0x62757273ULL);
    std::unordered_map<int, std::vector<std::size_t>> by_month;  // calendar month
    for (std::size_t i = 0; i < corpus.docs.size(); ++i) {
      const Date& pub = corpus.docs[i].pub_date;
      by_month[pub.year() * 12 + pub.month()].push_back(i);
    }
    std::vector<int> burst_months;
    for (const auto& [month, docs] : by_month) {
      if (docs.size() >= 2) burst_months.push_back(month);
    }
    std::sort(burst_months.begin(), burst_months.end());
    if (!burst_months.empty()) {
      int n_bursts = std::max(1, cfg.n_sessions / 10);
      for (int s = 0; s < n_bursts; ++s) {
        const std::vector<std::size_t>& group =
            by_month[burst_months[std::size_t(burst_rng.below(burst_months.size()))]];
        std::size_t k = std::min(group.size(), 2 + std::size_t(burst_rng.below(3)));
        auto picks = burst_rng.distinct_indices(group.size(), k);
        std::int64_t latest_pub = 0;
        std::int64_t earliest_pub = INT64_MAX;
        for (std::size_t p : picks) {
          std::int64_t pub = corpus.docs[group[p]].pub_date.epoch_seconds();
          latest_pub = std::max(latest_pub, pub);
          earliest_pub = std::min(earliest_pub, pub);
        }
        // strictly inside the first 30 days of every selected doc
        std::int64_t start = burst_rng.range(latest_pub, earliest_pub + 30 * 86400 - 1);
        char user[16];
        std::snprintf(user, sizeof(user), "bu%06d", s + 1);
        for (std::size_t i = 0; i < picks.size(); ++i) {
          corpus.events.push_back(AccessEvent{start + std::int64_t(i) * 30, user,
                                              corpus.docs[group[picks[i]]].doc_id});
        }
      }
    }
  }

  std::stable_sort(corpus.events.begin(), corpus.events.end(),
                   [](const AccessEvent& a, const AccessEvent& b) {
                     if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                     if (a.client_id != b.client_id) return a.client_id < b.client_id;
                     return a.doc_id < b.doc_id;
                   });

  // Citations: one potential citing paper per document slot; papers that
  // would cite nothing are never written. Reference lists favor one topic
  // with the same affinity sessions have, and only cite already-published
  // documents.
  detail::Rng cite_rng(cfg.seed ^ 0x63697465ULL);
  std::vector<std::size_t> by_pub(all_docs);
  std::sort(by_pub.begin(), by_pub.end(), [&](std::size_t a, std::size_t b) {
    if (corpus.docs[a].pub_date != corpus.docs[b].pub_date) {
      return corpus.docs[a].pub_date < corpus.docs[b].pub_date;
    }
    return corpus.docs[a].doc_id < corpus.docs[b].doc_id;
  });
  // per-topic views of by_pub, so eligible prefixes stay binary-searchable
  std::vector<std::vector<std::size_t>> topic_by_pub(std::size_t(cfg.n_topics));
  for (std::size_t idx : by_pub) {
    topic_by_pub[idx % std::size_t(cfg.n_topics)].push_back(idx);
  }
  auto eligible_prefix = [&](const std::vector<std::size_t>& pool, const Date& before) {
    return std::size_t(std::lower_bound(pool.begin(), pool.end(), before,
                                        [&](std::size_t idx, const Date& d) {
                                          return corpus.docs[idx].pub_date < d;
                                        }) -
                       pool.begin());
  };
  const std::int64_t span_days =
      cfg.span_end().days_since_epoch() - cfg.base_date.days_since_epoch();
  int emitted = 0;
  for (int j = 0; j < cfg.n_docs; ++j) {
    int want = cite_rng.poisson(cfg.citation_rate);
    if (want == 0) continue;
    Date citing_date;
    std::size_t eligible = 0;
    for (int attempt = 0; attempt < 100 && eligible == 0; ++attempt) {
      citing_date =
          cfg.base_date.add_days(std::int64_t(cite_rng.below(std::uint64_t(span_days))));
      eligible = eligible_prefix(by_pub, citing_date);
    }
    if (eligible == 0) continue;
    const std::vector<std::size_t>& topic_pool =
        topic_by_pub[std::size_t(cite_rng.below(std::uint64_t(cfg.n_topics)))];
    std::size_t topic_eligible = eligible_prefix(topic_pool, citing_date);
    std::vector<std::string> refs;
    std::unordered_set<std::size_t> used;
    int misses = 0;
    while (int(refs.size()) < want && misses < 50) {
      std::size_t doc_idx;
      if (topic_eligible > 0 && cite_rng.chance(cfg.p_intra_topic)) {
        doc_idx = topic_pool[std::size_t(cite_rng.below(topic_eligible))];
      } else {
        doc_idx = by_pub[std::size_t(cite_rng.below(eligible))];
      }
      if (!used.insert(doc_idx).second) {
        ++misses;
        continue;
      }
      refs.push_back(corpus.docs[doc_idx].doc_id);
    }
    if (refs.empty()) continue;
    char citing[16];
    std::snprintf(citing, sizeof(citing), "c%06d", ++emitted);
    corpus.citations.push_back(CitationRecord{citing, citing_date, std::move(refs)});
  }
  std::stable_sort(corpus.citations.begin(), corpus.citations.end(),
                   [](const CitationRecord& a, const CitationRecord& b) {
                     if (a.citing_date != b.citing_date) return a.citing_date < b.citing_date;
                     return a.citing_doc < b.citing_doc;
                   });

  return corpus;
}

inline MetaMap meta_map(const GeneratedCorpus& corpus) {
  MetaMap out;
  out.reserve(corpus.docs.size());
  for (const DocumentMeta& m : corpus.docs) out.emplace(m.doc_id, m);
  return out;
}

inline void write_access_log(std::ostream& out, const GeneratedCorpus& corpus) {
  for (const AccessEvent& e : corpus.events) out << format_access_line(e) << '\n';
}

inline void write_metadata(std::ostream& out, const GeneratedCorpus& corpus) {
  for (const DocumentMeta& m : corpus.docs) out << format_metadata_line(m) << '\n';
}

inline void write_citations(std::ostream& out, const GeneratedCorpus& corpus) {
  for (const CitationRecord& rec : corpus.citations) {
    out << format_citation_line(rec) << '\n';
  }
}

/// Oracle file: `doc_id<TAB>topic_index`, doc id order.
inline void write_oracle(std::ostream& out, const TopicOracle& oracle) {
  std::vector<std::pair<std::string, int>> rows(oracle.topic_of.begin(),
                                                oracle.topic_of.end());
  std::sort(rows.begin(), rows.end());
  for (const auto& [doc, topic] : rows) out << doc << '\t' << topic << '\n';
}

inline TopicOracle read_oracle(std::istream& in) {
  TopicOracle oracle;
  std::string line;
  std::size_t line_no = 0;
  int max_topic = -1;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = detail::strip_eol(line);
    auto fields = detail::split(sv, '\t');
    if (fields.size() != 2 || fields[0].empty()) {
      throw ParseError(line_no, "expected `doc_id<TAB>topic_index`");
    }
    std::uint64_t topic = 0;
    if (!detail::parse_u64(fields[1], topic)) {
      throw ParseError(line_no, "non-integer topic index");
    }
    if (!oracle.topic_of.emplace(std::string(fields[0]), int(topic)).second) {
      throw ParseError(line_no, "duplicate doc_id '" + std::string(fields[0]) + "'");
    }
    max_topic = std::max(max_topic, int(topic));
  }
  oracle.members.resize(std::size_t(max_topic + 1));
  std::vector<std::pair<std::string, int>> rows(oracle.topic_of.begin(),
                                                oracle.topic_of.end());
  std::sort(rows.begin(), rows.end());
  for (const auto& [doc, topic] : rows) {
    oracle.members[std::size_t(topic)].push_back(doc);
  }
  return oracle;
}

}  // namespace coaccess
