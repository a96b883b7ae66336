#include "focal/cli.hpp"

#include <atomic>
#include <memory>
#include <optional>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "focal/config.hpp"
#include "focal/errors.hpp"
#include "focal/layout.hpp"
#include "focal/metrics.hpp"
#include "focal/pipeline.hpp"
#include "focal/render.hpp"
#include "focal/server.hpp"
#include "focal/store.hpp"

namespace focal::cli {
namespace {

std::atomic<HttpServer*> g_active_server{nullptr};
std::atomic<bool> g_stop_requested{false};

struct Options {
  std::string config_path;

  std::string file;
  bool strict = false;

  std::string provider = "mock";
  std::string mock_script;
  std::optional<int> concurrency;
  std::optional<int> max_retries;
  std::string out_path;
  std::string report_path;

  std::string gold;
  std::string pred;
  std::string policy = "strict";
  std::string format = "table";

  std::string view = "overview";
  std::optional<int> width;

  std::string stories;
  std::optional<int> port;
  std::string host;
};

void print_violation(std::ostream& os, const Violation& v, std::string_view prefix = "") {
  fmt::print(os, "{}{}: {}: {}\n", prefix, v.path, violation_kind_name(v.kind), v.message);
}

AppConfig load_config(const Options& o) {
  AppConfig cfg = o.config_path.empty() ? AppConfig{} : AppConfig::from_file(o.config_path);
  cfg.apply_environment();
  return cfg;
}

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
  std::vector<std::string> warnings;
  const NarrativeDocument doc = load_document(o.file, ParseOptions{o.strict}, &warnings);
  for (const std::string& w : warnings) fmt::print(err, "warning: {}\n", w);
  const ValidationReport report = validate(doc, o.strict);
  for (const Violation& w : report.warnings) print_violation(err, w, "warning: ");
  for (const Violation& v : report.violations) print_violation(out, v);
  return report.ok() ? kExitOk : kExitFailure;
}

int cmd_annotate(const Options& o, std::ostream&, std::ostream& err) {
  AppConfig cfg = load_config(o);
  ProviderConfig& p = cfg.provider;
  if (o.provider == "mock") {
    p.kind = ProviderKind::kMock;
    if (o.mock_script.empty()) {
      fmt::print(err, "error: --provider mock requires --mock-script\n");
      return kExitUsage;
    }
    p.mock_script = o.mock_script;
  } else {
    p.kind = ProviderKind::kHttp;
    if (p.endpoint.empty()) {
      fmt::print(err, "error: http provider needs an endpoint (config 'provider.endpoint' or FOCAL_PROVIDER_ENDPOINT)\n");
      return kExitUsage;
    }
  }
  if (o.concurrency) p.concurrency = *o.concurrency;
  if (o.max_retries) p.max_retries = *o.max_retries;
  try {
    p.check();
  } catch (const std::invalid_argument& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitUsage;
  }

  const NarrativeDocument input = load_document(o.file);
  const ValidationReport check = validate(input);
  if (!check.ok()) {
    fmt::print(err, "error: input does not validate\n");
    for (const Violation& v : check.violations) print_violation(err, v);
    return kExitFailure;
  }

  const AnnotationResult result = annotate_document(input, cfg.provider);
  write_file(o.out_path, serialize_canonical(result.document));
  if (!o.report_path.empty()) write_file(o.report_path, result.report.to_json());

  const auto failures = result.report.failures();
  for (const EventOutcome& e : result.report.events) {
    for (const std::string& w : e.warnings) fmt::print(err, "warning: {}/{}: {}\n", e.scene, e.event, w);
  }
  for (const EventOutcome* f : failures)
    fmt::print(err, "failed: {}/{} after {} attempt(s): {}\n", f->scene, f->event, f->attempts, f->error);
  fmt::print(err, "annotated {} event(s), {} failed\n", result.report.events.size() - failures.size(), failures.size());
  return failures.empty() ? kExitOk : kExitFailure;
}

int cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err) {
  const LabelTable gold = load_label_table(o.gold);
  const LabelTable pred = load_label_table(o.pred);
  const AlignPolicy policy = o.policy == "intersect" ? AlignPolicy::kIntersect : AlignPolicy::kStrict;
  try {
    const EvalReport report = evaluate(gold, pred, policy);
    out << render_report(report, o.format == "json" ? ReportFormat::kJson : ReportFormat::kTable);
  } catch (const AlignmentError& e) {
    fmt::print(err, "error: row keys do not align\n");
    for (const std::string& k : e.missing_in_pred()) fmt::print(err, "  missing in prediction: {}\n", k);
    for (const std::string& k : e.missing_in_gold()) fmt::print(err, "  missing in gold: {}\n", k);
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_render(const Options& o, std::ostream&, std::ostream& err) {
  View view;
  try {
    view = View::parse(o.view);
  } catch (const std::invalid_argument& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitUsage;
  }
  const AppConfig cfg = load_config(o);
  LayoutConfig layout_cfg = cfg.layout;
  if (o.width) layout_cfg.container_width = *o.width;
  if (layout_cfg.container_width <= 0) {
    fmt::print(err, "error: --width must be positive\n");
    return kExitUsage;
  }

  const NarrativeDocument doc = load_document(o.file);
  const ValidationReport check = validate(doc);
  if (!check.ok()) {
    fmt::print(err, "error: document does not validate\n");
    for (const Violation& v : check.violations) print_violation(err, v);
    return kExitFailure;
  }
  const TimelineLayout layout = build_layout(doc, view, layout_cfg);
  write_file(o.out_path, render_timeline(layout, doc, cfg.style).content);
  return kExitOk;
}

int cmd_serve(const Options& o, std::ostream&, std::ostream& err) {
  AppConfig cfg = load_config(o);
  if (o.port) cfg.server.port = *o.port;
  if (!o.host.empty()) cfg.server.host = o.host;

  StoryCatalog catalog = scan_catalog(o.stories);
  fmt::print(err, "loaded {} stor{} from {}\n", catalog.entries.size(), catalog.entries.size() == 1 ? "y" : "ies",
             catalog.directory.string());
  for (const CatalogEntry& e : catalog.entries) fmt::print(err, "  {}: {}\n", e.id, e.title);
  for (const SkippedFile& s : catalog.skipped) fmt::print(err, "skipped {}: {}\n", s.path.string(), s.reason);

  auto service = std::make_shared<const ApiService>(std::move(catalog), cfg.layout, cfg.style);
  HttpServer server(service, cfg.server);
  const int port = server.bind();
  fmt::print(err, "listening on http://{}:{}\n", cfg.server.host, port);
  err.flush();

  g_active_server.store(&server);
  if (!g_stop_requested.load()) server.listen();
  g_active_server.store(nullptr);
  g_stop_requested.store(false);
  return kExitOk;
}

}  // namespace

void request_stop() {
  g_stop_requested.store(true);
  if (HttpServer* s = g_active_server.load()) s->stop();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Focalization annotation, evaluation and timeline rendering"};
  app.set_help_all_flag("--help-all");
  app.require_subcommand(1);
  app.add_option("--config", o.config_path, "JSON file with layout/style/provider/server overrides")->check(CLI::ExistingFile);

  auto* validate_cmd = app.add_subcommand("validate", "Check a narrative file against the data model");
  validate_cmd->add_option("file", o.file, "Narrative file")->required();
  validate_cmd->add_flag("--strict", o.strict, "Enable strict checks");

  auto* annotate_cmd = app.add_subcommand("annotate", "Label a segmented narrative with a provider");
  annotate_cmd->add_option("file", o.file, "Segmented narrative file")->required();
  annotate_cmd->add_option("--provider", o.provider, "Provider kind")->check(CLI::IsMember({"mock", "http"}))->required();
  annotate_cmd->add_option("--mock-script", o.mock_script, "Mock provider script")->check(CLI::ExistingFile);
  annotate_cmd->add_option("--concurrency", o.concurrency, "Events in flight")->check(CLI::PositiveNumber);
  annotate_cmd->add_option("--max-retries", o.max_retries, "Retries per event")->check(CLI::NonNegativeNumber);
  annotate_cmd->add_option("--out", o.out_path, "Annotated output file")->required();
  annotate_cmd->add_option("--report", o.report_path, "Pipeline report output file");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predicted labels against gold labels");
  evaluate_cmd->add_option("--gold", o.gold, "Gold narrative or label table")->required();
  evaluate_cmd->add_option("--pred", o.pred, "Predicted narrative or label table")->required();
  evaluate_cmd->add_option("--policy", o.policy, "Row alignment policy")->check(CLI::IsMember({"strict", "intersect"}));
  evaluate_cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"table", "json"}));

  auto* render_cmd = app.add_subcommand("render", "Render a timeline view to SVG");
  render_cmd->add_option("file", o.file, "Narrative file")->required();
  render_cmd->add_option("--view", o.view, "overview | scene:ID | character:ID");
  render_cmd->add_option("--width", o.width, "Container width in pixels");
  render_cmd->add_option("-o,--out", o.out_path, "Output SVG file")->required();

  auto* serve_cmd = app.add_subcommand("serve", "Serve stories over HTTP");
  serve_cmd->add_option("--stories", o.stories, "Directory of narrative files")->required();
  serve_cmd->add_option("--port", o.port, "Port (default 8080 or FOCAL_PORT)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--host", o.host, "Bind address");

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*validate_cmd) return cmd_validate(o, out, err);
    if (*annotate_cmd) return cmd_annotate(o, out, err);
    if (*evaluate_cmd) return cmd_evaluate(o, out, err);
    if (*render_cmd) return cmd_render(o, out, err);
    if (*serve_cmd) return cmd_serve(o, out, err);
  } catch (const ParseError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitFailure;
  } catch (const LayoutError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace focal::cli
