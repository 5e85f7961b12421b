#include "commands.hpp"

#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "ecc/analysis.hpp"
#include "ecc/ingest.hpp"
#include "ecc/metrics.hpp"
#include "ecc/parallel.hpp"
#include "ecc/report_io.hpp"
#include "ecc/synth.hpp"
#include "ecc/windowing.hpp"
#include "manifest.hpp"
#include "staging.hpp"

namespace ecc::cli {
namespace fs = std::filesystem;

namespace {

using Config = std::vector<std::pair<std::string, std::string>>;

struct InputFlags {
  std::string input;
  std::string schema = "generic-csv";
  bool skip_bad_rows = false;
  bool timestamps_ms = false;
};

struct MetricFlags {
  std::int64_t window_days = 28;
  std::string origin = "auto";
  std::string dedupe = "sum";
  std::string standardization = "per-window";
  std::string log_base = "e";
  std::string exclusion = "on";
};

struct AnalysisFlags {
  std::string name;
  std::string scores;
  std::size_t grid_size = 512;
  std::size_t min_windows = 4;
  std::string split = "median";
  std::size_t bins = 7;
  std::size_t min_users = 10;
  bool no_release_filter = false;
  std::string metadata;
  std::vector<double> ir_centers{0.6, 0.7, 0.8, 0.9, 0.99};
  double band = 0.01;
  double quintile = 0.2;
  std::size_t min_group_size = 10;
  std::string artist_attribute = "artist";
  std::vector<std::int64_t> widths = analysis::kDefaultSweepWidths;
};

struct SynthFlags {
  synth::SynthConfig config;
  std::string mode = "implicit";
  std::optional<double> niche_exponent;
};

struct Run {
  RunManifest manifest;
  std::ostream& out;
  std::ostream& err;
};

void add_input_flags(CLI::App* app, InputFlags& f) {
  app->add_option("-i,--input", f.input, "Feedback log to read")->required();
  app->add_option("--schema", f.schema, "Input layout")
      ->check(CLI::IsMember({"generic-csv", "movielens-ratings", "playlog-tsv"}))
      ->capture_default_str();
  app->add_flag("--skip-bad-rows", f.skip_bad_rows, "Skip malformed rows instead of failing");
  app->add_flag("--timestamps-ms", f.timestamps_ms, "Timestamps are epoch milliseconds");
}

void add_metric_flags(CLI::App* app, MetricFlags& f) {
  app->add_option("--window-days", f.window_days, "Window width in days")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--origin", f.origin, "Window origin: auto, epoch seconds or ISO 8601")->capture_default_str();
  app->add_option("--dedupe", f.dedupe, "Repeated (user, item, window) feedback")
      ->check(CLI::IsMember({"sum", "last"}))
      ->capture_default_str();
  app->add_option("--standardization", f.standardization, "Population for rarity z-scores")
      ->check(CLI::IsMember({"per-window", "global"}))
      ->capture_default_str();
  app->add_option("--log-base", f.log_base, "Logarithm base for raw rarity")
      ->check(CLI::IsMember({"e", "10"}))
      ->capture_default_str();
  app->add_option("--exclusion", f.exclusion, "Drop items that are alone in every active window")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
}

EventTable load_events(const InputFlags& f, Run& run) {
  ParseOptions options;
  options.skip_bad_rows = f.skip_bad_rows;
  options.timestamps_in_ms = f.timestamps_ms;
  ParseDiagnostics diagnostics;
  EventTable events = parse_events(f.input, parse_schema(f.schema), options, &diagnostics);
  run.manifest.inputs.push_back(digest_of(f.input, f.input));
  for (const auto& w : diagnostics.warnings) {
    fmt::print(run.err, "ecc: warning: {}\n", w);
    run.manifest.warnings.push_back(w);
  }
  if (events.skipped_rows > 0) {
    const auto msg = fmt::format("skipped {} malformed rows", events.skipped_rows);
    fmt::print(run.err, "ecc: warning: {}\n", msg);
    run.manifest.warnings.push_back(msg);
  }
  return events;
}

MetricsConfig metrics_config(const MetricFlags& f) {
  MetricsConfig c;
  c.window.width_days = f.window_days;
  c.window.origin = parse_origin(f.origin);
  c.dedupe = parse_dedupe(f.dedupe);
  c.rarity.standardization = parse_standardization(f.standardization);
  c.rarity.log_base = f.log_base == "10" ? LogBase::base10 : LogBase::natural;
  c.exclusion = f.exclusion == "on";
  return c;
}

void record_input(Config& c, const InputFlags& f) {
  c.emplace_back("input", f.input);
  c.emplace_back("schema", f.schema);
  c.emplace_back("skip_bad_rows", f.skip_bad_rows ? "true" : "false");
  c.emplace_back("timestamps_ms", f.timestamps_ms ? "true" : "false");
}

void record_metrics(Config& c, const MetricFlags& f, const EventTable& events) {
  const auto config = metrics_config(f);
  c.emplace_back("window_days", std::to_string(f.window_days));
  c.emplace_back("origin", f.origin);
  c.emplace_back("origin_resolved", std::to_string(resolve_origin(events, config.window)));
  c.emplace_back("dedupe", f.dedupe);
  c.emplace_back("standardization", f.standardization);
  c.emplace_back("log_base", f.log_base);
  c.emplace_back("exclusion", f.exclusion);
}

/// Resolves --threads, falling back to ECC_THREADS and then the hardware.
unsigned resolve_threads(const std::optional<unsigned>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("ECC_THREADS"); env && *env) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (*end != '\0' || v == 0 || v > 4096) {
      throw Error(ErrorKind::argument, fmt::format("ECC_THREADS must be a positive integer, got '{}'", env));
    }
    return static_cast<unsigned>(v);
  }
  return 0;
}

/// Hashes every staged file, writes the manifest and publishes the directory.
void finish(Run& run, StagedDirectory& stage, const io::Paths& written) {
  for (const auto& p : written) run.manifest.outputs.push_back(digest_of(p, p.filename().string()));
  run.manifest.finished = std::chrono::system_clock::now();
  write_manifest(stage.path(), run.manifest);
  stage.commit();
  fmt::print(run.out, "wrote {} files and manifest.json to {}\n", written.size(), stage.target().string());
}

Timestamp parse_split(const std::string& text, const EventTable& events) {
  if (text == "median") return analysis::median_timestamp(events);
  const auto ts = parse_origin(text);
  if (!ts) throw Error(ErrorKind::argument, "--split must be 'median', epoch seconds or an ISO 8601 time");
  return *ts;
}

// ---------------------------------------------------------------------------

int cmd_ingest_check(Run& run, const InputFlags& input, std::optional<std::int64_t> census_days,
                     const std::string& metadata) {
  const EventTable events = load_events(input, run);
  const auto s = validate_table(events);
  auto& o = run.out;
  fmt::print(o, "schema           {}\n", to_string(events.schema));
  fmt::print(o, "events           {}\n", s.events);
  fmt::print(o, "users            {}\n", s.users);
  fmt::print(o, "items            {}\n", s.items);
  fmt::print(o, "distinct pairs   {}\n", s.distinct_pairs);
  fmt::print(o, "density          {}\n", io::format_double(s.density));
  fmt::print(o, "value range      {} .. {}\n", io::format_double(s.value_min), io::format_double(s.value_max));
  fmt::print(o, "value mean       {}\n", io::format_double(s.value_mean));
  fmt::print(o, "first timestamp  {} ({})\n", format_iso8601(s.first_timestamp), s.first_timestamp);
  fmt::print(o, "last timestamp   {} ({})\n", format_iso8601(s.last_timestamp), s.last_timestamp);
  fmt::print(o, "skipped rows     {}\n", events.skipped_rows);

  if (!metadata.empty()) {
    const auto meta = parse_item_metadata(metadata, events.item_dictionary);
    fmt::print(o, "metadata items   {}\n", meta.attributes.size());
  }
  if (census_days) {
    WindowConfig wc;
    wc.width_days = *census_days;
    const auto wf = assign_windows(events, wc);
    fmt::print(o, "\nwindow,start,events,active_items,active_users\n");
    for (const auto& r : window_census(wf)) {
      fmt::print(o, "{},{},{},{},{}\n", r.window, format_iso8601(r.start), r.events, r.active_items, r.active_users);
    }
  }
  return kExitOk;
}

int cmd_compute(Run& run, const InputFlags& input, const MetricFlags& mf, const std::string& out_dir) {
  const EventTable events = load_events(input, run);
  const auto config = metrics_config(mf);
  record_input(run.manifest.config, input);
  record_metrics(run.manifest.config, mf, events);
  run.manifest.config.emplace_back("threads", std::to_string(thread_count()));

  const auto result = run_pipeline(events, config);

  StagedDirectory stage(out_dir);
  const auto written = io::write_scores(stage.path(), events, result.rarity, result.scores);
  finish(run, stage, written);
  return kExitOk;
}

int cmd_analyze(Run& run, const AnalysisFlags& af, const InputFlags& input, const MetricFlags& mf,
                const std::string& out_dir) {
  Config& config = run.manifest.config;
  config.emplace_back("analysis", af.name);
  const bool from_scores = !af.scores.empty();
  if (from_scores && af.name != "density" && af.name != "scatter") {
    throw Error(ErrorKind::argument, fmt::format("analysis '{}' needs the raw log (--input), not --scores", af.name));
  }
  if (!from_scores && input.input.empty()) throw Error(ErrorKind::argument, "one of --input or --scores is required");
  if (from_scores && !input.input.empty()) throw Error(ErrorKind::argument, "--input and --scores are exclusive");

  std::optional<EventTable> events;
  std::optional<PipelineResult> pipeline;
  std::optional<io::ScoreSnapshot> snapshot;
  if (from_scores) {
    snapshot = io::load_scores(af.scores);
    config.emplace_back("scores", af.scores);
    for (const char* name : {io::kItemScoresFile, io::kUserScoresFile, io::kItemWindowRarityFile}) {
      const fs::path p = fs::path(af.scores) / name;
      run.manifest.inputs.push_back(digest_of(p, p.string()));
    }
  } else {
    events = load_events(input, run);
    record_input(config, input);
    record_metrics(config, mf, *events);
    if (af.name == "density" || af.name == "scatter" || af.name == "groups") {
      pipeline = run_pipeline(*events, metrics_config(mf));
    }
  }
  config.emplace_back("threads", std::to_string(thread_count()));

  const RarityTable& rarity = snapshot ? snapshot->rarity : pipeline ? pipeline->rarity : RarityTable{};
  const EccentricityScores& scores = snapshot ? snapshot->scores : pipeline ? pipeline->scores : EccentricityScores{};

  auto emit = [&](auto&& write) {
    StagedDirectory stage(out_dir);
    finish(run, stage, write(stage.path()));
    return kExitOk;
  };

  if (af.name == "density") {
    config.emplace_back("grid_size", std::to_string(af.grid_size));
    const auto report = analysis::density_report(scores, af.grid_size);
    return emit([&](const fs::path& dir) { return io::write_density(dir, report, config); });
  }
  if (af.name == "scatter") {
    config.emplace_back("min_windows", std::to_string(af.min_windows));
    const auto report = analysis::rarity_eccentricity_scatter(rarity, scores, af.min_windows);
    const Dictionary& items = snapshot ? snapshot->items : events->item_dictionary;
    return emit([&](const fs::path& dir) { return io::write_scatter(dir, report, items, config); });
  }
  if (af.name == "stability") {
    analysis::StabilityOptions opts;
    opts.metrics = metrics_config(mf);
    opts.bins = af.bins;
    opts.min_users = af.min_users;
    opts.release_filter = !af.no_release_filter;
    const Timestamp split = parse_split(af.split, *events);
    config.emplace_back("split", af.split);
    config.emplace_back("split_resolved", std::to_string(split));
    config.emplace_back("bins", std::to_string(af.bins));
    config.emplace_back("min_users", std::to_string(af.min_users));
    config.emplace_back("release_filter", opts.release_filter ? "on" : "off");
    const auto matrix = analysis::stability_analysis(*events, split, opts);
    return emit([&](const fs::path& dir) { return io::write_transition(dir, matrix, config); });
  }
  if (af.name == "groups") {
    analysis::GroupOptions opts;
    opts.ir_centers = af.ir_centers;
    opts.band = af.band;
    opts.quintile = af.quintile;
    opts.min_group_size = af.min_group_size;
    opts.artist_attribute = af.artist_attribute;
    std::optional<ItemMetadata> metadata;
    if (!af.metadata.empty()) {
      metadata = parse_item_metadata(af.metadata, events->item_dictionary);
      run.manifest.inputs.push_back(digest_of(af.metadata, af.metadata));
    }
    config.emplace_back("metadata", af.metadata);
    config.emplace_back("ir_centers", fmt::format("{}", fmt::join(af.ir_centers, ",")));
    config.emplace_back("band", io::format_double(af.band));
    config.emplace_back("quintile", io::format_double(af.quintile));
    config.emplace_back("min_group_size", std::to_string(af.min_group_size));
    config.emplace_back("artist_attribute", af.artist_attribute);
    const auto table = analysis::group_comparison(*pipeline, metadata ? &*metadata : nullptr, opts);
    for (const auto& w : table.warnings) {
      fmt::print(run.err, "ecc: warning: {}\n", w);
      run.manifest.warnings.push_back(w);
    }
    return emit([&](const fs::path& dir) { return io::write_groups(dir, table, config); });
  }
  if (af.name == "sweep") {
    config.emplace_back("widths", fmt::format("{}", fmt::join(af.widths, ",")));
    const auto report = analysis::window_size_sweep(*events, af.widths, parse_origin(mf.origin));
    return emit([&](const fs::path& dir) { return io::write_window_sweep(dir, report, config); });
  }
  throw Error(ErrorKind::argument, fmt::format("unknown analysis '{}'", af.name));
}

int cmd_synth(Run& run, SynthFlags& sf, const std::string& out_dir) {
  auto& c = sf.config;
  c.mode = sf.mode == "explicit" ? synth::FeedbackMode::explicit_ratings : synth::FeedbackMode::implicit_plays;
  c.niche_exponent = sf.niche_exponent;
  const auto data = synth::generate(c);

  Config& config = run.manifest.config;
  config.emplace_back("seed", std::to_string(c.seed));
  config.emplace_back("users", std::to_string(c.n_users));
  config.emplace_back("items", std::to_string(c.n_items));
  config.emplace_back("events", std::to_string(c.n_events));
  config.emplace_back("span_days", std::to_string(c.time_span_days));
  config.emplace_back("start", std::to_string(c.start));
  config.emplace_back("exponent", io::format_double(c.popularity_exponent));
  config.emplace_back("eccentric_fraction", io::format_double(c.eccentric_user_fraction));
  config.emplace_back("niche_fraction", io::format_double(c.niche_item_fraction));
  config.emplace_back("affinity", io::format_double(c.affinity));
  config.emplace_back("mode", sf.mode);
  config.emplace_back("repeat", io::format_double(c.repeat_probability));
  config.emplace_back("niche_repeat", io::format_double(c.niche_repeat_probability));
  config.emplace_back("tail_share", io::format_double(c.tail_share));
  config.emplace_back("niche_exponent", c.niche_exponent ? io::format_double(*c.niche_exponent) : "");

  StagedDirectory stage(out_dir);
  const fs::path events_path = stage.path() / "events.csv";
  {
    std::ofstream out(events_path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, fmt::format("cannot open '{}'", events_path.string()));
    fmt::memory_buffer buf;
    fmt::format_to(std::back_inserter(buf), "user_id,item_id,value,timestamp\n");
    const auto& e = data.events;
    for (std::size_t r = 0; r < e.size(); ++r) {
      fmt::format_to(std::back_inserter(buf), "{},{},{},{}\n", e.user_dictionary.key(e.users[r]),
                     e.item_dictionary.key(e.items[r]), io::format_double(e.values[r]), e.timestamps[r]);
      if (buf.size() > (1u << 20)) {
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        buf.clear();
      }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw Error(ErrorKind::io, fmt::format("write to '{}' failed", events_path.string()));
  }

  std::string truth = "id,kind,label\n";
  for (std::size_t u = 0; u < data.truth.users.size(); ++u) {
    truth += fmt::format("{},user,{}\n", data.events.user_dictionary.key(static_cast<UserId>(u)),
                         synth::to_string(data.truth.users[u]));
  }
  for (std::size_t i = 0; i < data.truth.items.size(); ++i) {
    truth += fmt::format("{},item,{}\n", data.events.item_dictionary.key(static_cast<ItemId>(i)),
                         synth::to_string(data.truth.items[i]));
  }
  io::write_text(stage.path() / "truth.csv", truth);

  finish(run, stage, {events_path, stage.path() / "truth.csv"});
  return kExitOk;
}

}  // namespace

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::argument:
    case ErrorKind::config: return kExitUsage;
    case ErrorKind::io:
    case ErrorKind::parse:
    case ErrorKind::validation: return kExitData;
    case ErrorKind::degenerate:
    case ErrorKind::analysis: return kExitDegenerate;
    case ErrorKind::internal: return kExitInternal;
  }
  return kExitInternal;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Item rarity, user eccentricity and item eccentricity from feedback logs", "ecc"};
  app.fallthrough();
  app.set_version_flag("--version", ECC_VERSION);
  app.require_subcommand(1);
  std::optional<unsigned> threads;
  app.add_option("--threads", threads, "Worker threads (default: ECC_THREADS, then all cores)")
      ->check(CLI::Range(1u, 4096u));

  InputFlags input;
  MetricFlags metrics;
  AnalysisFlags analysis_flags;
  SynthFlags synth_flags;
  std::string out_dir;
  std::optional<std::int64_t> census_days;
  std::string ingest_metadata;

  auto* ingest = app.add_subcommand("ingest-check", "Parse and validate a feedback log, print a summary");
  add_input_flags(ingest, input);
  ingest->add_option("--census", census_days, "Also print per-window counts for this width in days")
      ->check(CLI::PositiveNumber);
  ingest->add_option("--metadata", ingest_metadata, "Item metadata sidecar to validate");

  auto* compute = app.add_subcommand("compute", "Compute item rarity and eccentricity scores");
  add_input_flags(compute, input);
  add_metric_flags(compute, metrics);
  compute->add_option("-o,--out", out_dir, "Output directory")->required();

  auto* analyze = app.add_subcommand("analyze", "Run one analysis and write its report");
  analyze->add_option("analysis", analysis_flags.name, "density, scatter, stability, groups or sweep")
      ->required()
      ->check(CLI::IsMember({"density", "scatter", "stability", "groups", "sweep"}));
  analyze->add_option("-i,--input", input.input, "Feedback log to read");
  analyze->add_option("--schema", input.schema, "Input layout")
      ->check(CLI::IsMember({"generic-csv", "movielens-ratings", "playlog-tsv"}))
      ->capture_default_str();
  analyze->add_flag("--skip-bad-rows", input.skip_bad_rows, "Skip malformed rows instead of failing");
  analyze->add_flag("--timestamps-ms", input.timestamps_ms, "Timestamps are epoch milliseconds");
  analyze->add_option("--scores", analysis_flags.scores, "Directory written by 'compute' (density, scatter)");
  add_metric_flags(analyze, metrics);
  analyze->add_option("-o,--out", out_dir, "Output directory")->required();
  analyze->add_option("--grid-size", analysis_flags.grid_size, "Density grid points")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20))
      ->capture_default_str();
  analyze->add_option("--min-windows", analysis_flags.min_windows, "Scatter: items need more active windows than this")
      ->capture_default_str();
  analyze->add_option("--split", analysis_flags.split, "Stability: 'median', epoch seconds or ISO 8601")
      ->capture_default_str();
  analyze->add_option("--bins", analysis_flags.bins, "Stability: quantile bins")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1000}))
      ->capture_default_str();
  analyze->add_option("--min-users", analysis_flags.min_users, "Stability: items need more users than this per period")
      ->capture_default_str();
  analyze->add_flag("--no-release-filter", analysis_flags.no_release_filter,
                    "Stability: keep items first seen late in the first period");
  analyze->add_option("--metadata", analysis_flags.metadata, "Groups: item metadata sidecar");
  analyze->add_option("--ir-centers", analysis_flags.ir_centers, "Groups: rarity percentile centers")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0));
  analyze->add_option("--band", analysis_flags.band, "Groups: half-width of each rarity band")
      ->check(CLI::Range(0.0, 0.5))
      ->capture_default_str();
  analyze->add_option("--quintile", analysis_flags.quintile, "Groups: share of the band in each group")
      ->check(CLI::Range(0.0, 0.5))
      ->capture_default_str();
  analyze->add_option("--min-group-size", analysis_flags.min_group_size, "Groups: smaller groups are skipped")
      ->capture_default_str();
  analyze->add_option("--artist-attribute", analysis_flags.artist_attribute, "Groups: metadata attribute for artists")
      ->capture_default_str();
  analyze->add_option("--widths", analysis_flags.widths, "Sweep: candidate window widths in days")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic log with planted eccentricity");
  auto& sc = synth_flags.config;
  synth_cmd->add_option("-o,--out", out_dir, "Output directory")->required();
  synth_cmd->add_option("--seed", sc.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--users", sc.n_users, "Users")->capture_default_str();
  synth_cmd->add_option("--items", sc.n_items, "Items")->capture_default_str();
  synth_cmd->add_option("--events", sc.n_events, "Events")->capture_default_str();
  synth_cmd->add_option("--span-days", sc.time_span_days, "Time span in days")->capture_default_str();
  synth_cmd->add_option("--start", sc.start, "First timestamp (epoch seconds)")->capture_default_str();
  synth_cmd->add_option("--exponent", sc.popularity_exponent, "Power-law exponent of item popularity")
      ->capture_default_str();
  synth_cmd->add_option("--eccentric-fraction", sc.eccentric_user_fraction, "Share of eccentric users")
      ->capture_default_str();
  synth_cmd->add_option("--niche-fraction", sc.niche_item_fraction, "Share of niche items")->capture_default_str();
  synth_cmd->add_option("--affinity", sc.affinity, "Probability an eccentric user's event targets a niche item")
      ->capture_default_str();
  synth_cmd->add_option("--mode", synth_flags.mode, "Feedback kind")
      ->check(CLI::IsMember({"implicit", "explicit"}))
      ->capture_default_str();
  synth_cmd->add_option("--repeat", sc.repeat_probability, "Repeat-play probability for mainstream items")
      ->capture_default_str();
  synth_cmd->add_option("--niche-repeat", sc.niche_repeat_probability, "Repeat-play probability for niche items")
      ->capture_default_str();
  synth_cmd->add_option("--tail-share", sc.tail_share, "Niche items come from this least-popular share")
      ->capture_default_str();
  synth_cmd->add_option("--niche-exponent", synth_flags.niche_exponent, "Power-law exponent inside the niche pool");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Run run{{}, out, err};
  run.manifest.tool_version = ECC_VERSION;
  run.manifest.started = std::chrono::system_clock::now();
  for (int i = 0; i < argc; ++i) run.manifest.argv.emplace_back(argv[i]);

  try {
    set_thread_count(resolve_threads(threads));
    if (ingest->parsed()) {
      run.manifest.command = "ingest-check";
      return cmd_ingest_check(run, input, census_days, ingest_metadata);
    }
    if (compute->parsed()) {
      run.manifest.command = "compute";
      return cmd_compute(run, input, metrics, out_dir);
    }
    if (analyze->parsed()) {
      run.manifest.command = "analyze";
      return cmd_analyze(run, analysis_flags, input, metrics, out_dir);
    }
    run.manifest.command = "synth";
    return cmd_synth(run, synth_flags, out_dir);
  } catch (const Error& e) {
    fmt::print(err, "ecc: {} error: {}\n", to_string(e.kind()), e.what());
    return exit_code_for(e.kind());
  } catch (const std::bad_alloc&) {
    fmt::print(err, "ecc: out of memory\n");
    return kExitInternal;
  } catch (const std::exception& e) {
    fmt::print(err, "ecc: internal error: {}\n", e.what());
    return kExitInternal;
  }
}

}  // namespace ecc::cli
