#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "tscreen/config.hpp"
#include "tscreen/cube.hpp"
#include "tscreen/errors.hpp"
#include "tscreen/geo.hpp"
#include "tscreen/ingest.hpp"
#include "tscreen/pivot.hpp"
#include "tscreen/report_io.hpp"
#include "tscreen/screen.hpp"
#include "tscreen/service.hpp"
#include "tscreen/synthetic.hpp"
#include "tscreen/watch.hpp"

using namespace tscreen;

namespace {

constexpr char kSnapshotMagic[] = "TSCUBE01";

Schema input_schema(const std::string& path) { return path.empty() ? default_schema() : Schema::load(path); }

bool is_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[8] = {};
  in.read(magic, sizeof magic);
  return in && std::string_view(magic, 8) == std::string_view(kSnapshotMagic, 8);
}

ParseResult read_event_file(const std::string& path, const Schema& schema) {
  auto parsed = parse_events_file(path, canonical_schema(schema));
  for (const auto& e : parsed.errors) std::cerr << path << ":" << e.line << ": " << e.cause << "\n";
  if (!parsed.errors.empty()) throw ConfigError(path + ": " + std::to_string(parsed.errors.size()) + " malformed rows");
  return parsed;
}

CountCube load_cube(const std::string& path, const Schema& schema) {
  if (is_snapshot(path)) return CountCube::load_file(path);
  auto parsed = read_event_file(path, schema);
  return CountCube::build(std::move(parsed.records), std::move(parsed.schema));
}

CentroidTable load_centroids(const std::string& path) {
  return path.empty() ? default_centroids() : CentroidTable::load(path);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct IngestArgs {
  std::string input, schema, output, summary, schema_out;
  char delimiter = ',';
};

int cmd_ingest(const IngestArgs& args) {
  auto schema = input_schema(args.schema);
  auto parsed = parse_events_file(args.input, schema, args.delimiter);
  for (const auto& e : parsed.errors) std::cerr << args.input << ":" << e.line << ": " << e.cause << "\n";

  auto canonical = canonical_schema(parsed.schema);
  if (!args.output.empty()) {
    auto out = open_output(args.output);
    write_events(out, parsed.records, canonical);
  }
  if (!args.schema_out.empty()) open_output(args.schema_out) << canonical.to_json().dump(2) << "\n";

  auto summary = summarize(parsed.records, parsed.schema).to_json();
  summary["rejected_rows"] = parsed.errors.size();
  if (!args.summary.empty()) open_output(args.summary) << summary.dump(2) << "\n";
  std::cout << summary.dump(2) << "\n";
  return 0;
}

struct ScreenArgs {
  std::string events, schema, config, centroids, output;
  std::optional<int> top_n, window, stride, reference, workers;
  std::optional<double> alpha;
  std::optional<std::string> frontier;
  bool prospective = false;
  bool quiet = false;
};

int cmd_screen(const ScreenArgs& args) {
  auto config = args.config.empty() ? ScreeningConfig{} : ScreeningConfig::load(args.config);
  if (args.top_n) config.top_n = *args.top_n;
  if (args.window) config.window_length = *args.window;
  if (args.stride) config.stride = *args.stride;
  if (args.reference) config.reference_length = *args.reference;
  if (args.workers) config.workers = static_cast<unsigned>(*args.workers);
  if (args.alpha) config.alpha = *args.alpha;
  if (args.prospective) config.prospective = true;
  if (args.frontier) config.frontier = parse_date_or_throw(*args.frontier);

  auto cube = load_cube(args.events, input_schema(args.schema));
  config.validate(cube.schema());
  auto regions = region_sets_for(cube.schema(), config, load_centroids(args.centroids));

  ScreenResult result;
  if (config.prospective) {
    result = prospective_screen(cube, config, regions, config.frontier.value_or(cube.last_day()));
  } else {
    result = massive_screen(cube, config, regions);
  }

  std::vector<std::string> inputs{args.events};
  if (!args.config.empty()) inputs.push_back(args.config);
  if (!args.centroids.empty()) inputs.push_back(args.centroids);
  auto manifest = RunManifest::start("screen", config.to_json(), inputs);
  if (!args.output.empty()) {
    const auto jsonl = args.output + ".jsonl", csv = args.output + ".csv", man = args.output + ".manifest.json";
    {
      auto out = open_output(jsonl);
      write_reports_jsonl(out, result.reports, cube.schema(), manifest.config_digest);
    }
    {
      auto out = open_output(csv);
      write_reports_csv(out, result.reports);
    }
    manifest.outputs = {jsonl, csv};
    manifest.write(man);
  }
  if (!args.quiet) {
    print_top_table(std::cout, result.reports, cube.schema(), config.top_n);
    std::cout << result.reports.size() << " flagged of " << result.scored << " scored queries\n";
  }
  return 0;
}

struct PivotArgs {
  std::string events, schema, row, col, filter = "{}", start, end, format = "text", output, order = "frequency";
};

int cmd_pivot(const PivotArgs& args) {
  auto cube = load_cube(args.events, input_schema(args.schema));
  Conjunction filter;
  try {
    filter = Conjunction::from_json(nlohmann::json::parse(args.filter));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("--filter is not valid JSON: ") + e.what());
  }
  const Day start = args.start.empty() ? cube.first_day() : parse_date_or_throw(args.start);
  const Day end = args.end.empty() ? cube.last_day() : parse_date_or_throw(args.end);
  const DateWindow window{start, days_between(start, end) + 1};
  auto order = args.order == "domain" ? ColumnOrder::kDomain : ColumnOrder::kGlobalFrequency;
  auto table = pivot(cube, args.row, args.col, filter, window, order);

  std::ofstream file;
  if (!args.output.empty()) file = open_output(args.output);
  std::ostream& out = args.output.empty() ? std::cout : file;
  if (args.format == "csv") {
    table.write_csv(out);
  } else if (args.format == "json") {
    out << table.to_json().dump(2) << "\n";
  } else {
    table.write_text(out);
  }
  return 0;
}

struct ServeArgs {
  std::string events, schema, config, centroids, host = "127.0.0.1", static_dir;
  int port = 8080;
};

int cmd_serve(const ServeArgs& args) {
  auto cube = load_cube(args.events, input_schema(args.schema));
  auto defaults = args.config.empty() ? ScreeningConfig{} : ScreeningConfig::load(args.config);
  Service service(std::move(cube), load_centroids(args.centroids), defaults);
  std::cerr << "serving on http://" << args.host << ":" << args.port << "/v1\n";
  if (!serve(service, args.host, args.port, args.static_dir)) {
    std::cerr << "error: cannot bind " << args.host << ":" << args.port << "\n";
    return 1;
  }
  return 0;
}

struct WatchArgs {
  std::string events, appended, schema, config, centroids, output;
  bool follow = false;
  int poll_ms = 1000;
};

// Returns complete lines appended after `offset`, advancing it past them.
std::string read_new_lines(const std::string& path, std::streamoff& offset) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::streamoff>(in.tellg());
  if (size <= offset) return {};
  in.seekg(offset);
  std::string chunk(static_cast<std::size_t>(size - offset), '\0');
  in.read(chunk.data(), static_cast<std::streamsize>(chunk.size()));
  const auto last = chunk.rfind('\n');
  if (last == std::string::npos) return {};
  chunk.resize(last + 1);
  offset += static_cast<std::streamoff>(chunk.size());
  return chunk;
}

int cmd_watch(const WatchArgs& args) {
  auto config = args.config.empty() ? ScreeningConfig{} : ScreeningConfig::load(args.config);
  auto history = read_event_file(args.events, input_schema(args.schema));
  // Appended events may run past the declared calendar.
  auto attrs = history.schema.attributes();
  const Schema schema(attrs, DateFormat::kIso, std::nullopt);
  auto regions = region_sets_for(schema, config, load_centroids(args.centroids));
  ProspectiveWatcher watcher(std::move(history.records), schema, config, regions);

  std::ofstream file;
  if (!args.output.empty()) file = open_output(args.output);
  std::ostream& out = args.output.empty() ? std::cout : file;

  std::string header;
  std::streamoff offset = 0;
  for (;;) {
    auto chunk = read_new_lines(args.appended, offset);
    if (!chunk.empty()) {
      if (header.empty()) {
        header = chunk.substr(0, chunk.find('\n') + 1);
        chunk.erase(0, header.size());
      }
      std::istringstream in(header + chunk);
      auto parsed = parse_events(in, schema);
      for (const auto& e : parsed.errors) std::cerr << args.appended << ": " << e.cause << "\n";
      for (const auto& alert : watcher.push(std::move(parsed.records))) {
        auto j = report_to_json(alert.report, schema);
        j["frontier"] = format_date(alert.frontier);
        out << j.dump() << "\n";
      }
      out.flush();
    }
    if (!args.follow) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(args.poll_ms));
  }
  return 0;
}

struct SynthArgs {
  std::string config, output;
  std::optional<std::uint64_t> seed;
};

int cmd_synth(const SynthArgs& args) {
  auto config = SyntheticConfig::load(args.config);
  if (args.seed) config.seed = *args.seed;
  auto records = generate_synthetic(config);
  auto schema = canonical_schema(config.schema);
  if (args.output.empty()) {
    write_events(std::cout, records, schema);
  } else {
    auto out = open_output(args.output);
    write_events(out, records, schema);
  }
  std::cerr << records.size() << " events\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multidimensional event-count screening for spatio-temporal anomalies"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate a raw event CSV and write the canonical event file");
  ingest_cmd->add_option("input", ingest.input, "Raw CSV")->required();
  ingest_cmd->add_option("--schema", ingest.schema, "Schema JSON (default: built-in)");
  ingest_cmd->add_option("-o,--output", ingest.output, "Canonical event file");
  ingest_cmd->add_option("--summary", ingest.summary, "Summary JSON output");
  ingest_cmd->add_option("--schema-out", ingest.schema_out, "Closed canonical schema JSON output");
  ingest_cmd->add_option("--delimiter", ingest.delimiter, "Field delimiter");

  ScreenArgs screen;
  auto* screen_cmd = app.add_subcommand("screen", "Massive or prospective screening");
  screen_cmd->add_option("events", screen.events, "Event file or cube snapshot")->required();
  screen_cmd->add_option("-c,--config", screen.config, "Screening config JSON");
  screen_cmd->add_option("--schema", screen.schema, "Schema JSON");
  screen_cmd->add_option("--centroids", screen.centroids, "Centroid CSV (location,lat,lon)");
  screen_cmd->add_option("-o,--output", screen.output, "Output prefix for .jsonl, .csv and .manifest.json");
  screen_cmd->add_option("--top", screen.top_n, "Rows in the console table");
  screen_cmd->add_option("--window", screen.window, "Window length in days");
  screen_cmd->add_option("--stride", screen.stride, "Window stride in days");
  screen_cmd->add_option("--reference", screen.reference, "Reference length in days");
  screen_cmd->add_option("--workers", screen.workers, "Worker threads (0: all cores)");
  screen_cmd->add_option("--alpha", screen.alpha, "Significance level");
  screen_cmd->add_flag("--prospective", screen.prospective, "Only windows ending at the frontier");
  screen_cmd->add_option("--frontier", screen.frontier, "Prospective frontier (YYYY-MM-DD)");
  screen_cmd->add_flag("-q,--quiet", screen.quiet, "No console table");

  PivotArgs piv;
  auto* pivot_cmd = app.add_subcommand("pivot", "Row-normalized pivot table");
  pivot_cmd->add_option("events", piv.events, "Event file or cube snapshot")->required();
  pivot_cmd->add_option("--row", piv.row, "Row attribute")->required();
  pivot_cmd->add_option("--col", piv.col, "Column attribute")->required();
  pivot_cmd->add_option("--filter", piv.filter, "Conjunction JSON, e.g. {\"gender\":\"female\"}");
  pivot_cmd->add_option("--schema", piv.schema, "Schema JSON");
  pivot_cmd->add_option("--start", piv.start, "Window start (YYYY-MM-DD)");
  pivot_cmd->add_option("--end", piv.end, "Window end (YYYY-MM-DD)");
  pivot_cmd->add_option("--format", piv.format, "csv, json or text")->check(CLI::IsMember({"csv", "json", "text"}));
  pivot_cmd->add_option("--order", piv.order, "Column order")->check(CLI::IsMember({"frequency", "domain"}));
  pivot_cmd->add_option("-o,--output", piv.output, "Output file (default stdout)");

  ServeArgs srv;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP JSON API under /v1");
  serve_cmd->add_option("events", srv.events, "Event file or cube snapshot")->required();
  serve_cmd->add_option("--schema", srv.schema, "Schema JSON");
  serve_cmd->add_option("-c,--config", srv.config, "Default screening config");
  serve_cmd->add_option("--centroids", srv.centroids, "Centroid CSV");
  serve_cmd->add_option("--host", srv.host, "Bind address");
  serve_cmd->add_option("-p,--port", srv.port, "Port");
  serve_cmd->add_option("--static", srv.static_dir, "Directory served at /");

  WatchArgs watch;
  auto* watch_cmd = app.add_subcommand("watch", "Prospective alerts over an appended-events file");
  watch_cmd->add_option("events", watch.events, "History event file")->required();
  watch_cmd->add_option("appended", watch.appended, "Appended events (canonical layout with header)")->required();
  watch_cmd->add_option("-c,--config", watch.config, "Screening config JSON");
  watch_cmd->add_option("--schema", watch.schema, "Schema JSON");
  watch_cmd->add_option("--centroids", watch.centroids, "Centroid CSV");
  watch_cmd->add_option("-o,--output", watch.output, "Alerts JSONL (default stdout)");
  watch_cmd->add_flag("-f,--follow", watch.follow, "Keep polling for new lines");
  watch_cmd->add_option("--poll-ms", watch.poll_ms, "Polling interval");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic event file");
  synth_cmd->add_option("config", synth.config, "Synthetic config JSON")->required();
  synth_cmd->add_option("-o,--output", synth.output, "Event file (default stdout)");
  synth_cmd->add_option("--seed", synth.seed, "Override the config seed");

  std::string schema_path;
  auto* schema_cmd = app.add_subcommand("schema", "Print the effective schema");
  schema_cmd->add_option("--schema", schema_path, "Schema JSON");

  std::string snap_events, snap_schema, snap_output;
  std::string snap_eager;
  auto* snap_cmd = app.add_subcommand("snapshot", "Build a cube and save a binary snapshot");
  snap_cmd->add_option("events", snap_events, "Event file")->required();
  snap_cmd->add_option("-o,--output", snap_output, "Snapshot path")->required();
  snap_cmd->add_option("--schema", snap_schema, "Schema JSON");
  snap_cmd->add_option("--eager", snap_eager, "Comma-separated eagerly indexed attributes");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest_cmd) return cmd_ingest(ingest);
    if (*screen_cmd) return cmd_screen(screen);
    if (*pivot_cmd) return cmd_pivot(piv);
    if (*serve_cmd) return cmd_serve(srv);
    if (*watch_cmd) return cmd_watch(watch);
    if (*synth_cmd) return cmd_synth(synth);
    if (*schema_cmd) {
      std::cout << input_schema(schema_path).to_json().dump(2) << "\n";
      return 0;
    }
    if (*snap_cmd) {
      auto parsed = read_event_file(snap_events, input_schema(snap_schema));
      MaterializationPolicy policy;
      policy.eager_attributes = split_list(snap_eager);
      auto cube = CountCube::build(std::move(parsed.records), std::move(parsed.schema), policy);
      cube.save_file(snap_output);
      std::cerr << cube.total_events() << " events, " << cube.calendar_days() << " days\n";
      return 0;
    }
  } catch (const SchemaMismatch& e) {
    std::cerr << "schema mismatch: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
