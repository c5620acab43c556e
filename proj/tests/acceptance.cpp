// Acceptance suite: one pass/fail line per criterion, exit code equals the
// number of failures. Each criterion pins its thresholds in code.

#include <sys/resource.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "coaccess/cli.hpp"
#include "coaccess/co_occurrence.hpp"
#include "coaccess/evaluator.hpp"
#include "coaccess/log_model.hpp"
#include "coaccess/recommender.hpp"
#include "coaccess/sessionizer.hpp"
#include "coaccess/synth_corpus.hpp"
#include "test_oracles.hpp"

namespace fs = std::filesystem;
using namespace coaccess;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* pattern, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, value);
  return buf;
}

// ---------------------------------------------------------------- criterion 1
Outcome counting_oracle() {
  auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1001);
  for (int trial = 0; trial < 100; ++trial) {
    int n_docs = 2 + int(rng() % 49);
    MetaMap meta;
    std::vector<std::string> docs;
    for (int d = 0; d < n_docs; ++d) {
      std::string id = "d" + std::to_string(d);
      meta.emplace(id,
                   DocumentMeta{id, Date(2004, 1, 1).add_days(std::int64_t(rng() % 700))});
      docs.push_back(id);
    }
    std::vector<Session> sessions;
    int n_sessions = int(rng() % 201);
    for (int s = 0; s < n_sessions; ++s) {
      std::vector<std::string> chosen;
      std::size_t k = 1 + rng() % 7;
      for (std::size_t i = 0; i < k; ++i) chosen.push_back(docs[rng() % docs.size()]);
      std::sort(chosen.begin(), chosen.end());
      chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
      std::int64_t at =
          Date(2004, 1, 1).epoch_seconds() + std::int64_t(rng() % (700 * 86400));
      sessions.push_back(Session{"c", at, at, std::move(chosen)});
    }
    DebiasConfig debias{rng() % 2 == 0, int(rng() % 61)};
    auto got = oracles::to_map(count_codownloads(sessions, meta, debias));
    auto want = oracles::brute_force_codownloads(sessions, meta, debias);
    if (got != want) {
      return {false, "corpus " + std::to_string(trial) + " diverges from the oracle"};
    }
  }
  double elapsed = seconds_since(start);
  if (elapsed >= 10.0) return {false, fmt("took %.1fs, budget 10s", elapsed)};
  return {true, "100 random corpora exact, " + fmt("%.2fs", elapsed)};
}

// ---------------------------------------------------------------- criterion 2
Outcome shard_invariance() {
  std::mt19937_64 rng(2002);
  for (int trial = 0; trial < 20; ++trial) {
    MetaMap meta;
    std::vector<std::string> docs;
    for (int d = 0; d < 25; ++d) {
      std::string id = "d" + std::to_string(d);
      meta.emplace(id,
                   DocumentMeta{id, Date(2004, 1, 1).add_days(std::int64_t(rng() % 400))});
      docs.push_back(id);
    }
    std::vector<Session> sessions;
    int n = 1 + int(rng() % 150);
    for (int s = 0; s < n; ++s) {
      std::vector<std::string> chosen;
      std::size_t k = 1 + rng() % 6;
      for (std::size_t i = 0; i < k; ++i) chosen.push_back(docs[rng() % docs.size()]);
      std::sort(chosen.begin(), chosen.end());
      chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
      std::int64_t at =
          Date(2004, 1, 1).epoch_seconds() + std::int64_t(rng() % (400 * 86400));
      sessions.push_back(Session{"c", at, at, std::move(chosen)});
    }
    DebiasConfig debias{rng() % 2 == 0, 30};
    auto whole = count_codownloads(sessions, meta, debias);

    std::size_t n_shards = 1 + rng() % 8;
    CoOccurrenceIndex merged(IndexKind::codownload);
    std::size_t begin = 0;
    for (std::size_t shard = 0; shard < n_shards; ++shard) {
      std::size_t end = shard + 1 == n_shards
                            ? sessions.size()
                            : begin + (sessions.size() - begin) / (n_shards - shard);
      std::span<const Session> part(sessions.data() + begin, end - begin);
      merged.merge_from(count_codownloads(part, meta, debias));
      begin = end;
    }
    if (!(merged == whole)) {
      return {false, "sequence " + std::to_string(trial) + " with " +
                         std::to_string(n_shards) + " shards diverged"};
    }
  }
  return {true, "20 sequences x 1-8 shards exact"};
}

// ---------------------------------------------------------------- criterion 3
Outcome ap_correctness() {
  using V = std::vector<std::string>;
  struct Case {
    V ranked;
    V relevant;
    double want;
  };
  std::vector<Case> cases = {
      {{"R1", "X", "R2"}, {"R1", "R2"}, (1.0 + 2.0 / 3.0) / 2.0},
      {{"R1", "R2"}, {"R1", "R2"}, 1.0},
      {{"R2", "R1"}, {"R1", "R2"}, 1.0},
      {{"X", "Y", "Z"}, {"R1"}, 0.0},
      {{}, {"R1"}, 0.0},
      {{"R1"}, {"R1", "R2", "R3"}, 1.0 / 3.0},
      {{"X", "R1", "Y", "R2", "R3"},
       {"R1", "R2", "R3"},
       (1.0 / 2.0 + 2.0 / 4.0 + 3.0 / 5.0) / 3.0},
  };
  for (std::size_t i = 0; i < cases.size(); ++i) {
    double got = average_precision(cases[i].ranked, cases[i].relevant);
    if (std::abs(got - cases[i].want) > 1e-9) {
      return {false, "case " + std::to_string(i) + ": got " + std::to_string(got) +
                         ", want " + std::to_string(cases[i].want)};
    }
    double oracle = oracles::ap_oracle(cases[i].ranked, cases[i].relevant);
    if (std::abs(got - oracle) > 1e-9) {
      return {false, "case " + std::to_string(i) + " disagrees with the oracle"};
    }
  }
  return {true, std::to_string(cases.size()) + " enumerated cases within 1e-9"};
}

// ---------------------------------------------------------------- criterion 4
Outcome debias_end_to_end() {
  GenConfig cfg;
  cfg.seed = 7;
  cfg.n_topics = 20;
  cfg.n_docs = 200;
  cfg.n_sessions = 5000;
  cfg.p_intra_topic = 0.9;
  cfg.citation_rate = 3.0;
  cfg.announcement_burst = true;
  GeneratedCorpus corpus = generate(cfg);
  MetaMap meta = meta_map(corpus);

  std::vector<AccessEvent> events = corpus.events;
  sort_events(events);
  auto sessions = sessionize(filter_events(events, FilterConfig{}), 1800);

  std::vector<Session> organic, burst;
  for (const Session& s : sessions) {
    (s.client_id.starts_with("bu") ? burst : organic).push_back(s);
  }
  if (burst.empty()) return {false, "generator produced no burst sessions"};

  auto organic_raw = count_codownloads(organic, meta, DebiasConfig{false, 30});
  auto burst_raw = count_codownloads(burst, meta, DebiasConfig{false, 30});
  auto debiased = count_codownloads(sessions, meta, DebiasConfig{true, 30});
  auto raw = count_codownloads(sessions, meta, DebiasConfig{false, 30});

  std::size_t burst_only = 0;
  for (const IndexEntry& e : burst_raw.entries_sorted()) {
    if (organic_raw.lookup(e.doc_a, e.doc_b) > 0) continue;
    ++burst_only;
    if (debiased.lookup(e.doc_a, e.doc_b) != 0) {
      return {false, "burst-only pair (" + e.doc_a + "," + e.doc_b +
                         ") survived the debiased index"};
    }
    if (raw.lookup(e.doc_a, e.doc_b) < 1) {
      return {false, "burst-only pair (" + e.doc_a + "," + e.doc_b +
                         ") missing from the raw index"};
    }
  }
  if (burst_only == 0) return {false, "no burst-only pairs to check"};
  return {true, std::to_string(burst_only) + " burst-only pairs erased by debiasing"};
}

// ---------------------------------------------------------------- criterion 5
Outcome topic_recovery() {
  auto start = std::chrono::steady_clock::now();
  GenConfig cfg;
  cfg.seed = 7;
  cfg.n_topics = 20;
  cfg.n_docs = 200;
  cfg.n_sessions = 5000;
  cfg.p_intra_topic = 0.9;
  cfg.citation_rate = 3.0;
  GeneratedCorpus corpus = generate(cfg);
  MetaMap meta = meta_map(corpus);

  std::vector<AccessEvent> events = corpus.events;
  sort_events(events);
  auto sessions = sessionize(filter_events(events, FilterConfig{}), 1800);
  auto cd_index = count_codownloads(sessions, meta, DebiasConfig{true, 30});
  auto cc_index = count_cocitations(corpus.citations);

  // Oracle-relevant queries for every document, aged by how long the data
  // could observe the document.
  Date end = cfg.span_end();
  std::vector<EvalQuery> queries;
  for (const DocumentMeta& doc : corpus.docs) {
    EvalQuery q;
    q.query_doc = doc.doc_id;
    q.relevant = oracle_relevant(corpus.oracle, doc.doc_id);
    if (q.relevant.empty()) continue;
    q.age_months = std::max(0, months_between(doc.pub_date, end));
    queries.push_back(std::move(q));
  }
  if (queries.empty()) return {false, "no oracle queries"};

  auto mean_ap = [&](const CoOccurrenceIndex& index) {
    double sum = 0.0;
    std::vector<std::string> ranked;
    for (const EvalQuery& q : queries) {
      auto list = recommend(index, q.query_doc, 100);
      ranked.clear();
      for (const auto& item : list.items) ranked.push_back(item.doc_id);
      sum += average_precision(ranked, q.relevant);
    }
    return sum / double(queries.size());
  };
  double map_cd = mean_ap(cd_index);

  // seeded random ranking baseline over the same queries
  coaccess::detail::Rng rng(1234);
  double rand_sum = 0.0;
  for (const EvalQuery& q : queries) {
    std::vector<std::string> ranked;
    for (const DocumentMeta& doc : corpus.docs) {
      if (doc.doc_id != q.query_doc) ranked.push_back(doc.doc_id);
    }
    rng.shuffle(ranked);
    if (ranked.size() > 100) ranked.resize(100);
    rand_sum += average_precision(ranked, q.relevant);
  }
  double map_rand = rand_sum / double(queries.size());

  auto cd_curve = map_over_age(cd_index, queries, 100);
  auto cc_curve = map_over_age(cc_index, queries, 100);
  if (cd_curve.empty() || cc_curve.empty()) return {false, "empty MAP curve"};
  if (cd_curve.front().x != cc_curve.front().x) {
    return {false, "curves disagree on the earliest bin"};
  }
  double early_cd = cd_curve.front().y;
  double early_cc = cc_curve.front().y;

  double elapsed = seconds_since(start);
  std::string detail = "MAP(cd)=" + fmt("%.4f", map_cd) +
                       " random=" + fmt("%.4f", map_rand) +
                       " early-bin cd=" + fmt("%.4f", early_cd) +
                       " cc=" + fmt("%.4f", early_cc) + " " + fmt("%.1fs", elapsed);
  if (map_cd < 5.0 * map_rand) return {false, "co-download MAP below 5x random: " + detail};
  if (early_cd < early_cc) return {false, "co-citation wins the earliest bin: " + detail};
  if (elapsed >= 60.0) return {false, "over the 60s budget: " + detail};
  return {true, detail};
}

// ---------------------------------------------------------------- criterion 6
Outcome coverage_gap() {
  GenConfig cfg;
  cfg.seed = 7;
  cfg.n_topics = 20;
  cfg.n_docs = 200;
  cfg.n_sessions = 5000;
  cfg.p_intra_topic = 0.9;
  cfg.citation_rate = 1.0;  // sparse citations
  GeneratedCorpus corpus = generate(cfg);
  MetaMap meta = meta_map(corpus);

  std::vector<AccessEvent> events = corpus.events;
  sort_events(events);
  auto sessions = sessionize(filter_events(events, FilterConfig{}), 1800);
  auto cd_index = count_codownloads(sessions, meta, DebiasConfig{true, 30});
  auto cc_index = count_cocitations(corpus.citations);

  std::vector<std::string> corpus_ids;
  for (const DocumentMeta& doc : corpus.docs) corpus_ids.push_back(doc.doc_id);

  auto covered_fraction = [&](const CoOccurrenceIndex& index) {
    auto dist = coverage_distribution(index, corpus_ids);
    std::size_t nonzero = 0;
    for (std::uint64_t v : dist) {
      if (v >= 1) ++nonzero;
    }
    return double(nonzero) / double(dist.size());
  };
  double frac_cd = covered_fraction(cd_index);
  double frac_cc = covered_fraction(cc_index);
  std::string detail =
      "coverage cd=" + fmt("%.3f", frac_cd) + " cc=" + fmt("%.3f", frac_cc);
  if (frac_cd - frac_cc < 0.3) return {false, detail + " (gap below 0.3)"};
  return {true, detail};
}

// ---------------------------------------------------------------- criterion 7
Outcome monotone_growth() {
  std::mt19937_64 rng(7007);
  for (int trial = 0; trial < 6; ++trial) {
    int n_docs = 3 + int(rng() % 28);
    MetaMap meta;
    std::vector<std::string> docs;
    for (int d = 0; d < n_docs; ++d) {
      std::string id = "d" + std::to_string(d);
      meta.emplace(id,
                   DocumentMeta{id, Date(2004, 1, 1).add_days(std::int64_t(rng() % 400))});
      docs.push_back(id);
    }
    std::vector<Session> sessions;
    std::vector<CitationRecord> citations;
    int n_items = 1 + int(rng() % 120);
    for (int i = 0; i < n_items; ++i) {
      std::vector<std::string> chosen;
      std::size_t k = 1 + rng() % 5;
      for (std::size_t j = 0; j < k; ++j) chosen.push_back(docs[rng() % docs.size()]);
      std::sort(chosen.begin(), chosen.end());
      chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
      std::int64_t t =
          Date(2004, 1, 1).epoch_seconds() + std::int64_t(rng() % (500 * 86400));
      sessions.push_back(Session{"c", t, t, chosen});
      citations.push_back(
          CitationRecord{"z" + std::to_string(i), Date::from_epoch_seconds(t), chosen});
    }
    std::size_t cap = 1 + rng() % 10;
    int bin_months = 1 + int(rng() % 3);

    for (IndexKind mode : {IndexKind::codownload, IndexKind::cocitation}) {
      auto got = recs_over_age_series(sessions, citations, meta, mode, cap, bin_months);
      auto want = oracles::series_oracle(sessions, citations, meta, mode, cap, bin_months);
      if (got != want) {
        return {false, "series diverge from the truncated-index oracle (corpus " +
                           std::to_string(trial) + ")"};
      }
      for (const auto& [doc, series] : got) {
        for (std::size_t i = 1; i < series.size(); ++i) {
          if (series[i - 1] > series[i]) {
            return {false, "series for " + doc + " decreases at bin " + std::to_string(i)};
          }
        }
      }
      auto curve = recs_over_age(sessions, citations, meta, mode, cap, bin_months);
      if (!want.empty()) {
        std::size_t bins = want.begin()->second.size();
        if (curve.size() != bins) return {false, "curve length mismatch"};
        for (std::size_t bin = 0; bin < bins; ++bin) {
          double sum = 0.0;
          for (const auto& [doc, series] : want) sum += double(series[bin]);
          double mean = sum / double(want.size());
          if (curve[bin].y != mean) {  // exact: same finite sums
            return {false, "per-bin mean differs from the oracle at bin " +
                               std::to_string(bin)};
          }
        }
      }
    }
  }
  return {true, "6 corpora, both modes, series and means exact"};
}

// ---------------------------------------------------------------- criterion 8
Outcome determinism() {
  struct CaptureStderr {
    std::ostringstream sink;
    std::streambuf* old;
    CaptureStderr() : old(std::cerr.rdbuf(sink.rdbuf())) {}
    ~CaptureStderr() { std::cerr.rdbuf(old); }
  } quiet;

  fs::path base = fs::temp_directory_path() / "coaccess_acceptance_determinism";
  fs::remove_all(base);
  auto chain = [&](const fs::path& dir) -> bool {
    std::string corpus = (dir / "corpus").string();
    auto p = [&](const char* name) { return (dir / name).string(); };
    if (coaccess::cli::run({"gen", "--seed", "7", "--out", corpus}) != 0) return false;
    if (coaccess::cli::run({"ingest", "--log", corpus + "/access.log", "--out",
                            p("sessions.tsv")}) != 0) {
      return false;
    }
    if (coaccess::cli::run({"count", "--mode", "codownload", "--sessions",
                            p("sessions.tsv"), "--meta", corpus + "/meta.tsv", "--out",
                            p("cd.idx")}) != 0) {
      return false;
    }
    if (coaccess::cli::run({"count", "--mode", "cocitation", "--cite",
                            corpus + "/citations.tsv", "--out", p("cc.idx")}) != 0) {
      return false;
    }
    if (coaccess::cli::run({"recommend", "--index", p("cd.idx"), "--doc", "d000001",
                            "--out", p("recs.tsv")}) != 0) {
      return false;
    }
    if (coaccess::cli::run({"evaluate", "--sessions", p("sessions.tsv"), "--meta",
                            corpus + "/meta.tsv", "--cite", corpus + "/citations.tsv",
                            "--cutoff", "2005-01-01", "--out", p("eval")}) != 0) {
      return false;
    }
    return true;
  };
  if (!chain(base / "one")) return {false, "first pipeline run failed"};
  if (!chain(base / "two")) return {false, "second pipeline run failed"};

  std::vector<std::string> files = {"corpus/access.log",
                                    "corpus/meta.tsv",
                                    "corpus/citations.tsv",
                                    "corpus/oracle.tsv",
                                    "sessions.tsv",
                                    "cd.idx",
                                    "cc.idx",
                                    "recs.tsv",
                                    "eval/coverage_codownload.csv",
                                    "eval/coverage_cocitation.csv",
                                    "eval/recs_over_age_codownload.csv",
                                    "eval/recs_over_age_cocitation.csv",
                                    "eval/map_over_age_codownload.csv",
                                    "eval/map_over_age_cocitation.csv"};
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
  };
  for (const std::string& file : files) {
    std::string one = slurp(base / "one" / file);
    std::string two = slurp(base / "two" / file);
    if (one.empty() && file != "recs.tsv") return {false, file + " is empty"};
    if (one != two) return {false, file + " differs between runs"};
  }
  fs::remove_all(base);
  return {true, std::to_string(files.size()) + " pipeline files byte-identical"};
}

// ---------------------------------------------------------------- criterion 9
long peak_rss_kb() {
  struct rusage usage{};
  if (getrusage(RUSAGE_SELF, &usage) == 0 && usage.ru_maxrss > 0) {
    return usage.ru_maxrss;
  }
  std::ifstream in("/proc/self/status");  // fallback
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("VmHWM:", 0) == 0) {
      return std::strtol(line.c_str() + 6, nullptr, 10);
    }
  }
  return -1;
}

Outcome performance() {
  GenConfig cfg;
  cfg.seed = 99;
  cfg.n_topics = 50;
  cfg.n_docs = 5000;
  cfg.n_users = 20000;
  cfg.n_sessions = 260000;
  cfg.docs_per_session = 4;
  GeneratedCorpus corpus = generate(cfg);
  if (corpus.events.size() < 1000000) {
    return {false, "generator produced only " + std::to_string(corpus.events.size()) +
                       " events"};
  }
  fs::path dir = fs::temp_directory_path() / "coaccess_acceptance_perf";
  fs::create_directories(dir);
  {
    std::ofstream log(dir / "access.log", std::ios::binary);
    write_access_log(log, corpus);
  }
  MetaMap meta = meta_map(corpus);
  std::size_t n_events = corpus.events.size();
  corpus.events.clear();
  corpus.events.shrink_to_fit();

  auto start = std::chrono::steady_clock::now();
  std::ifstream log_in(dir / "access.log", std::ios::binary);
  std::vector<AccessEvent> events = read_access_log(log_in);
  sort_events(events);
  std::vector<AccessEvent> kept = filter_events(events, FilterConfig{});
  events.clear();
  events.shrink_to_fit();
  auto sessions = sessionize(kept, 1800);
  auto index = count_codownloads(sessions, meta, DebiasConfig{true, 30});
  double elapsed = seconds_since(start);

  long rss_kb = peak_rss_kb();
  fs::remove_all(dir);
  std::string detail = std::to_string(n_events) + " events in " +
                       fmt("%.1fs", elapsed) + ", peak rss " +
                       std::to_string(rss_kb / 1024) + " MiB, " +
                       std::to_string(index.pair_count()) + " pairs";
  if (elapsed >= 30.0) return {false, detail + " (budget 30s)"};
  if (rss_kb < 0) return {false, detail + " (cannot measure peak rss)"};
  if (rss_kb >= 1024 * 1024) return {false, detail + " (budget 1 GiB)"};
  return {true, detail};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  std::vector<Criterion> criteria = {
      {"counting-oracle", counting_oracle},
      {"shard-invariance", shard_invariance},
      {"ap-correctness", ap_correctness},
      {"debias-end-to-end", debias_end_to_end},
      {"topic-recovery", topic_recovery},
      {"coverage-gap", coverage_gap},
      {"monotone-growth", monotone_growth},
      {"determinism", determinism},
      {"performance", performance},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.pass) ++failures;
    std::printf("%s %zu %s: %s\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].name, outcome.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
