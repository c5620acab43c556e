#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>

#include "coaccess/co_occurrence.hpp"
#include "coaccess/date.hpp"
#include "coaccess/errors.hpp"
#include "coaccess/evaluator.hpp"
#include "coaccess/io_util.hpp"
#include "coaccess/log_model.hpp"
#include "coaccess/recommender.hpp"
#include "coaccess/sessionizer.hpp"
#include "coaccess/synth_corpus.hpp"

namespace coaccess::cli {

namespace detail {

inline Date parse_date_flag(const std::string& text, const std::string& flag) {
  auto date = Date::parse(text);
  if (!date) {
    throw CLI::ValidationError(flag, "expected YYYY-MM-DD, got '" + text + "'");
  }
  return *date;
}

struct IngestOptions {
  std::string log_path;
  std::string sessions_path;
  std::int64_t gap_seconds = 1800;
  std::int64_t max_events_per_day = 500;
  std::string blocklist_path;
};

inline void add_ingest_flags(CLI::App* cmd, IngestOptions& opts, bool log_required) {
  auto* log = cmd->add_option("--log", opts.log_path, "access log (raw events)");
  cmd->add_option("--gap-seconds", opts.gap_seconds, "session inactivity gap")
      ->default_val(1800)
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-events-per-day", opts.max_events_per_day,
                  "per-client daily event cap; heavier clients are dropped as crawlers")
      ->default_val(500)
      ->check(CLI::PositiveNumber);
  cmd->add_option("--blocklist", opts.blocklist_path,
                  "file with one blocked client_id per line");
  if (log_required) log->required();
}

inline FilterConfig filter_config(const IngestOptions& opts) {
  FilterConfig cfg;
  cfg.max_events_per_client_per_day = opts.max_events_per_day;
  if (!opts.blocklist_path.empty()) {
    std::ifstream in = open_input(opts.blocklist_path);
    std::string line;
    while (std::getline(in, line)) {
      std::string_view sv = coaccess::detail::strip_eol(line);
      if (!sv.empty()) cfg.blocked_clients.emplace(sv);
    }
  }
  return cfg;
}

/// parse -> sort -> filter -> sessionize
inline std::vector<Session> ingest_pipeline(const IngestOptions& opts) {
  std::ifstream in = open_input(opts.log_path);
  std::vector<AccessEvent> events = read_access_log(in);
  sort_events(events);
  std::vector<AccessEvent> kept = filter_events(events, filter_config(opts));
  return sessionize(kept, opts.gap_seconds);
}

/// Sessions from whichever of --sessions / --log was given.
inline std::vector<Session> load_sessions(const IngestOptions& opts) {
  if (!opts.sessions_path.empty()) {
    std::ifstream in = open_input(opts.sessions_path);
    return read_sessions(in);
  }
  return ingest_pipeline(opts);
}

inline std::vector<CitationRecord> load_citations_file(const std::string& path) {
  std::ifstream in = open_input(path);
  CitationWarnings warnings;
  auto records = load_citations(in, &warnings);
  if (warnings.duplicate_refs > 0) {
    std::cerr << "coaccess: warning: removed " << warnings.duplicate_refs
              << " duplicate ref(s)\n";
  }
  if (warnings.self_refs > 0) {
    std::cerr << "coaccess: warning: removed " << warnings.self_refs
              << " self-reference(s)\n";
  }
  return records;
}

inline MetaMap load_metadata_file(const std::string& path) {
  std::ifstream in = open_input(path);
  return load_metadata(in);
}

struct GenOptions {
  GenConfig cfg;
  std::string base_date = "2004-01-01";
  std::string out_dir;
};

inline void run_gen(const GenOptions& opts) {
  GenConfig cfg = opts.cfg;
  cfg.base_date = parse_date_flag(opts.base_date, "--base-date");
  GeneratedCorpus corpus = generate(cfg);
  std::filesystem::create_directories(opts.out_dir);
  std::filesystem::path dir(opts.out_dir);
  AtomicFileSet out;
  write_access_log(out.add(dir / "access.log"), corpus);
  write_metadata(out.add(dir / "meta.tsv"), corpus);
  write_citations(out.add(dir / "citations.tsv"), corpus);
  write_oracle(out.add(dir / "oracle.tsv"), corpus.oracle);
  out.commit();
  std::cerr << "coaccess: wrote " << corpus.events.size() << " events, "
            << corpus.docs.size() << " documents, " << corpus.citations.size()
            << " citation records to " << opts.out_dir << '\n';
}

struct CountOptions {
  IngestOptions ingest;
  std::string mode;
  std::string meta_path;
  std::string cite_path;
  std::string out_path;
  std::string cutoff;
  int debias_days = 30;
  bool no_debias = false;
};

inline void run_count(const CountOptions& opts) {
  std::optional<Date> cutoff;
  if (!opts.cutoff.empty()) cutoff = parse_date_flag(opts.cutoff, "--cutoff");
  CoOccurrenceIndex index;
  if (opts.mode == "codownload") {
    if (opts.ingest.sessions_path.empty() == opts.ingest.log_path.empty()) {
      throw CLI::RequiredError("count --mode codownload: exactly one of --sessions/--log");
    }
    DebiasConfig debias{!opts.no_debias, opts.debias_days};
    if (debias.enabled && opts.meta_path.empty()) {
      throw CLI::RequiredError("count --mode codownload: --meta (or pass --no-debias)");
    }
    std::vector<Session> sessions = load_sessions(opts.ingest);
    if (cutoff) {
      std::erase_if(sessions, [&](const Session& s) {
        return s.start_ts >= cutoff->epoch_seconds();
      });
    }
    MetaMap meta;
    if (!opts.meta_path.empty()) meta = load_metadata_file(opts.meta_path);
    index = count_codownloads(sessions, meta, debias);
  } else {
    if (opts.cite_path.empty()) {
      throw CLI::RequiredError("count --mode cocitation: --cite");
    }
    index = count_cocitations(load_citations_file(opts.cite_path), cutoff);
  }
  AtomicFileSet out;
  write_index(index, out.add(opts.out_path));
  out.commit();
  std::cerr << "coaccess: wrote " << index.pair_count() << " pairs to " << opts.out_path
            << '\n';
}

struct RecommendOptions {
  std::string index_path;
  std::string doc;
  std::size_t cap = 100;
  std::string out_path;
};

inline void run_recommend(const RecommendOptions& opts) {
  std::ifstream in = open_input(opts.index_path);
  CoOccurrenceIndex index = read_index(in);
  RecommendationList list = recommend(index, opts.doc, opts.cap);
  if (opts.out_path.empty()) {
    write_recommendations(std::cout, list);
  } else {
    AtomicFileSet out;
    write_recommendations(out.add(opts.out_path), list);
    out.commit();
  }
}

struct EvaluateOptions {
  IngestOptions ingest;
  std::string meta_path;
  std::string cite_path;
  std::string out_dir;
  std::string cutoff = "2005-01-01";
  std::size_t cap = 100;
  int bin_months = 1;
  int debias_days = 30;
  bool no_debias = false;
  std::size_t sample = 0;
  std::uint64_t sample_seed = 0;
};

inline void run_evaluate(const EvaluateOptions& opts) {
  if (opts.ingest.sessions_path.empty() == opts.ingest.log_path.empty()) {
    throw CLI::RequiredError("evaluate: exactly one of --sessions/--log");
  }
  Date cutoff = parse_date_flag(opts.cutoff, "--cutoff");
  std::vector<Session> sessions = load_sessions(opts.ingest);
  MetaMap meta = load_metadata_file(opts.meta_path);
  std::vector<CitationRecord> citations = load_citations_file(opts.cite_path);

  std::vector<std::string> corpus;
  corpus.reserve(meta.size());
  for (const auto& [doc, m] : meta) corpus.push_back(doc);
  std::sort(corpus.begin(), corpus.end());
  std::unordered_set<std::string> corpus_set(corpus.begin(), corpus.end());

  DebiasConfig debias{!opts.no_debias, opts.debias_days};
  std::vector<Session> pre_cutoff_sessions;
  for (const Session& s : sessions) {
    if (s.start_ts < cutoff.epoch_seconds()) pre_cutoff_sessions.push_back(s);
  }
  CoOccurrenceIndex cd_pre = count_codownloads(pre_cutoff_sessions, meta, debias);
  CoOccurrenceIndex cc_pre = count_cocitations(citations, cutoff);
  CoOccurrenceIndex cd_full = count_codownloads(sessions, meta, debias);
  CoOccurrenceIndex cc_full = count_cocitations(citations);

  EvalWarnings warnings;
  std::vector<EvalQuery> queries =
      build_eval_queries(citations, meta, cutoff, corpus_set, &warnings);
  if (warnings.missing_meta > 0) {
    std::cerr << "coaccess: warning: skipped " << warnings.missing_meta
              << " quer(ies) lacking metadata\n";
  }
  if (opts.sample > 0 && opts.sample < queries.size()) {
    coaccess::detail::Rng rng(opts.sample_seed);
    rng.shuffle(queries);
    queries.resize(opts.sample);
  }

  std::filesystem::create_directories(opts.out_dir);
  std::filesystem::path dir(opts.out_dir);
  AtomicFileSet out;
  write_coverage_csv(out.add(dir / "coverage_codownload.csv"),
                     coverage_distribution(cd_full, corpus));
  write_coverage_csv(out.add(dir / "coverage_cocitation.csv"),
                     coverage_distribution(cc_full, corpus));
  write_curve_csv(out.add(dir / "recs_over_age_codownload.csv"),
                  recs_over_age(sessions, citations, meta, IndexKind::codownload,
                                opts.cap, opts.bin_months));
  write_curve_csv(out.add(dir / "recs_over_age_cocitation.csv"),
                  recs_over_age(sessions, citations, meta, IndexKind::cocitation,
                                opts.cap, opts.bin_months));
  write_curve_csv(out.add(dir / "map_over_age_codownload.csv"),
                  map_over_age(cd_pre, queries, opts.cap));
  write_curve_csv(out.add(dir / "map_over_age_cocitation.csv"),
                  map_over_age(cc_pre, queries, opts.cap));
  out.commit();
  std::cerr << "coaccess: evaluated " << queries.size() << " queries over "
            << corpus.size() << " documents into " << opts.out_dir << '\n';
}

}  // namespace detail

inline int run(int argc, const char* const* argv) {
  CLI::App app{"related-paper recommendations from digital-library access logs"};
  app.require_subcommand(1);

  detail::GenOptions gen;
  CLI::App* gen_cmd =
      app.add_subcommand("gen", "generate a seeded synthetic corpus with a topic oracle");
  gen_cmd->add_option("--seed", gen.cfg.seed, "master seed")->default_val(0);
  gen_cmd->add_option("--out", gen.out_dir, "output directory")->required();
  gen_cmd->add_option("--docs", gen.cfg.n_docs)->default_val(200);
  gen_cmd->add_option("--topics", gen.cfg.n_topics)->default_val(20);
  gen_cmd->add_option("--users", gen.cfg.n_users)->default_val(500);
  gen_cmd->add_option("--sessions", gen.cfg.n_sessions)->default_val(5000);
  gen_cmd->add_option("--docs-per-session", gen.cfg.docs_per_session)->default_val(4);
  gen_cmd->add_option("--p-intra", gen.cfg.p_intra_topic, "topic affinity")->default_val(0.9);
  gen_cmd->add_option("--citation-rate", gen.cfg.citation_rate)->default_val(3.0);
  gen_cmd->add_flag("--burst,!--no-burst", gen.cfg.announcement_burst,
                    "inject same-month announcement co-access bursts");
  gen_cmd->add_option("--span-months", gen.cfg.time_span_months)->default_val(24);
  gen_cmd->add_option("--cutoff-month", gen.cfg.cutoff_month)->default_val(12);
  gen_cmd->add_option("--base-date", gen.base_date, "first publication month")
      ->default_val("2004-01-01");
  gen_cmd->callback([&] { detail::run_gen(gen); });

  detail::IngestOptions ingest;
  std::string ingest_out;
  CLI::App* ingest_cmd = app.add_subcommand(
      "ingest", "parse, filter and sessionize an access log into a session dump");
  detail::add_ingest_flags(ingest_cmd, ingest, /*log_required=*/true);
  ingest_cmd->add_option("--out", ingest_out, "session dump path")->required();
  ingest_cmd->callback([&] {
    std::vector<Session> sessions = detail::ingest_pipeline(ingest);
    AtomicFileSet out;
    write_sessions(out.add(ingest_out), sessions);
    out.commit();
    std::cerr << "coaccess: wrote " << sessions.size() << " sessions to " << ingest_out
              << '\n';
  });

  detail::CountOptions count;
  CLI::App* count_cmd =
      app.add_subcommand("count", "build a co-download or co-citation pair index");
  count_cmd->add_option("--mode", count.mode, "codownload|cocitation")
      ->required()
      ->check(CLI::IsMember({"codownload", "cocitation"}));
  detail::add_ingest_flags(count_cmd, count.ingest, /*log_required=*/false);
  count_cmd->add_option("--sessions", count.ingest.sessions_path,
                        "session dump (alternative to --log)");
  count_cmd->add_option("--meta", count.meta_path, "document metadata");
  count_cmd->add_option("--cite", count.cite_path, "citation records");
  count_cmd->add_option("--out", count.out_path, "index path")->required();
  count_cmd->add_option("--cutoff", count.cutoff,
                        "only count data strictly before this date (YYYY-MM-DD)");
  count_cmd->add_option("--debias-days", count.debias_days,
                        "first-month co-announcement window")
      ->default_val(30)
      ->check(CLI::NonNegativeNumber);
  count_cmd->add_flag("--no-debias", count.no_debias, "disable announcement debiasing");
  count_cmd->callback([&] { detail::run_count(count); });

  detail::RecommendOptions rec;
  CLI::App* rec_cmd =
      app.add_subcommand("recommend", "rank related papers for one document");
  rec_cmd->add_option("--index", rec.index_path, "pair index file")->required();
  rec_cmd->add_option("--doc", rec.doc, "query document id")->required();
  rec_cmd->add_option("--k", rec.cap, "list cap")->default_val(100)->check(CLI::PositiveNumber);
  rec_cmd->add_option("--out", rec.out_path, "output path (default: stdout)");
  rec_cmd->callback([&] { detail::run_recommend(rec); });

  detail::EvaluateOptions eval;
  CLI::App* eval_cmd = app.add_subcommand(
      "evaluate", "coverage, recommendation-growth and MAP-over-age analyses");
  detail::add_ingest_flags(eval_cmd, eval.ingest, /*log_required=*/false);
  eval_cmd->add_option("--sessions", eval.ingest.sessions_path,
                       "session dump (alternative to --log)");
  eval_cmd->add_option("--meta", eval.meta_path, "document metadata")->required();
  eval_cmd->add_option("--cite", eval.cite_path, "citation records")->required();
  eval_cmd->add_option("--out", eval.out_dir, "output directory for CSV files")->required();
  eval_cmd->add_option("--cutoff", eval.cutoff,
                       "similarity uses data before this date, ground truth after")
      ->default_val("2005-01-01");
  eval_cmd->add_option("--k", eval.cap, "recommendation cap")
      ->default_val(100)
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--bin-months", eval.bin_months, "age bin width")
      ->default_val(1)
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--debias-days", eval.debias_days)
      ->default_val(30)
      ->check(CLI::NonNegativeNumber);
  eval_cmd->add_flag("--no-debias", eval.no_debias, "disable announcement debiasing");
  eval_cmd->add_option("--sample", eval.sample,
                       "evaluate a seeded subsample of this many queries (0 = all)")
      ->default_val(0);
  eval_cmd->add_option("--seed", eval.sample_seed, "subsample seed")->default_val(0);
  eval_cmd->callback([&] { detail::run_evaluate(eval); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "coaccess: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

inline int run(const std::vector<std::string>& args) {
  std::vector<std::string> full;
  full.reserve(args.size() + 1);
  full.push_back("coaccess");
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(full.size());
  for (const std::string& arg : full) argv.push_back(arg.c_str());
  return run(int(argv.size()), argv.data());
}

}  // namespace coaccess::cli
