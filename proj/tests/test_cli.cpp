#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "focal/cli.hpp"
#include "focal/server.hpp"
#include "focal/store.hpp"
#include "httplib.h"
#include "support.hpp"

using namespace focal;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "focal");
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string fx(std::string_view name) { return test::fixture(name).string(); }

bool contains(const std::string& hay, std::string_view needle) { return hay.find(needle) != std::string::npos; }

int free_port() {
  ServerOptions opts;
  opts.port = 0;
  HttpServer probe(std::make_shared<const ApiService>(StoryCatalog{}), opts);
  return probe.bind();
}

}  // namespace

TEST(CliValidate, CleanFileIsSilent) {
  const CliRun r = invoke({"validate", fx("sample.focal.json"), "--strict"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "");
  EXPECT_EQ(r.err, "");
}

TEST(CliValidate, ReportsOneLinePerViolation) {
  const CliRun r = invoke({"validate", fx("invalid/overlap.focal.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1);
  EXPECT_TRUE(contains(r.out, "overlap")) << r.out;
}

TEST(CliValidate, StrictWarningKeepsExitZero) {
  const CliRun r = invoke({"validate", fx("multi_pov.focal.json"), "--strict"});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(contains(r.err, "warning: ")) << r.err;
}

TEST(CliValidate, ParseErrorExitsOne) {
  const CliRun r = invoke({"validate", fx("stories/broken.focal.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(contains(r.err, "error: ")) << r.err;
}

TEST(CliAnnotate, MockReproducesSample) {
  for (const char* conc : {"1", "8"}) {
    test::TempDir dir;
    const CliRun r = invoke({"annotate", fx("segmented.focal.json"), "--provider", "mock", "--mock-script",
                       fx("mock_script.json"), "--concurrency", conc, "--out", (dir / "o.json").string(), "--report",
                       (dir / "r.json").string()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(test::slurp(dir / "o.json"), test::slurp(test::fixture("sample.focal.json"))) << conc;
    const auto report = nlohmann::json::parse(test::slurp(dir / "r.json"));
    EXPECT_FALSE(report.empty());
    EXPECT_TRUE(contains(r.err, "annotated 4 event(s), 0 failed")) << r.err;
  }
}

TEST(CliAnnotate, MissingEntryFails) {
  test::TempDir dir;
  const CliRun r = invoke({"annotate", fx("segmented.focal.json"), "--provider", "mock", "--mock-script",
                     fx("mock_script_missing.json"), "--out", (dir / "o.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(contains(r.err, "s1/e3")) << r.err;
}

TEST(CliAnnotate, UsageErrors) {
  test::TempDir dir;
  const std::string out = (dir / "o.json").string();
  EXPECT_EQ(invoke({"annotate", fx("segmented.focal.json"), "--provider", "mock", "--out", out}).code, 2);
  EXPECT_EQ(invoke({"annotate", fx("segmented.focal.json"), "--provider", "carrier-pigeon", "--out", out}).code, 2);
  EXPECT_EQ(invoke({"annotate", fx("segmented.focal.json"), "--provider", "mock", "--mock-script",
                 fx("mock_script.json"), "--concurrency", "0", "--out", out})
                .code,
            2);
}

TEST(CliEvaluate, SelfIsPerfect) {
  const CliRun r = invoke({"evaluate", "--gold", fx("sample.focal.json"), "--pred", fx("sample.focal.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "Micro F1                        1.00")) << r.out;
  EXPECT_TRUE(contains(r.out, "Macro F1                        1.00")) << r.out;
}

TEST(CliEvaluate, PinnedTables) {
  const CliRun r = invoke({"evaluate", "--gold", fx("eval_gold.json"), "--pred", fx("eval_pred.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "Micro F1                        0.83")) << r.out;

  const CliRun j = invoke({"evaluate", "--gold", fx("eval_gold.json"), "--pred", fx("eval_pred.json"), "--format", "json"});
  EXPECT_EQ(j.code, 0);
  const auto report = nlohmann::json::parse(j.out);
  EXPECT_NEAR(report["overall"]["micro_f1"].get<double>(), 5.0 / 6.0, 1e-12);
  EXPECT_EQ(report["overall"]["exact_row_match"].get<double>(), 0.0);
}

TEST(CliEvaluate, DisjointKeys) {
  const CliRun strict = invoke({"evaluate", "--gold", fx("eval_gold.json"), "--pred", fx("eval_pred_disjoint.json")});
  EXPECT_EQ(strict.code, 1);
  EXPECT_TRUE(contains(strict.err, "s1/e1/c1")) << strict.err;
  const CliRun inter = invoke({"evaluate", "--gold", fx("eval_gold.json"), "--pred", fx("eval_pred_disjoint.json"),
                         "--policy", "intersect"});
  EXPECT_EQ(inter.code, 1);
  EXPECT_EQ(invoke({"evaluate", "--gold", fx("eval_gold.json"), "--pred", fx("eval_pred.json"), "--format", "xml"}).code,
            2);
}

TEST(CliRender, WritesOverview) {
  test::TempDir dir;
  const CliRun r = invoke({"render", fx("sample.focal.json"), "-o", (dir / "t.svg").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  const std::string svg = test::slurp(dir / "t.svg");
  EXPECT_NO_THROW(test::parse_xml(svg));
  EXPECT_EQ(test::check_golden("overview.svg", svg), "");
}

TEST(CliRender, Failures) {
  test::TempDir dir;
  const std::string out = (dir / "t.svg").string();
  const CliRun narrow = invoke({"render", fx("sample.focal.json"), "--width", "188", "-o", out});
  EXPECT_EQ(narrow.code, 1);
  EXPECT_TRUE(contains(narrow.err, "'s1'")) << narrow.err;
  EXPECT_EQ(invoke({"render", fx("sample.focal.json"), "--width", "400", "-o", out}).code, 0);
  EXPECT_EQ(invoke({"render", fx("sample.focal.json"), "--view", "character:ghost", "-o", out}).code, 1);
  EXPECT_EQ(invoke({"render", fx("sample.focal.json"), "--view", "diagonal", "-o", out}).code, 2);
  EXPECT_EQ(invoke({"render", fx("sample.focal.json"), "--width", "0", "-o", out}).code, 2);
  EXPECT_EQ(invoke({"render", fx("invalid/dangling.focal.json"), "-o", out}).code, 1);
}

TEST(CliServe, ServesUntilStopped) {
  const int port = free_port();
  std::ostringstream out, err;
  int code = -1;
  std::jthread serving([&] {
    code = cli::run({"focal", "serve", "--stories", fx("stories"), "--port", std::to_string(port), "--host",
                     "127.0.0.1"},
                    out, err);
  });
  struct Stop {
    std::jthread& t;
    ~Stop() {
      if (t.joinable()) cli::request_stop();
    }
  } stop{serving};

  httplib::Client client("127.0.0.1", port);
  httplib::Result res;
  for (int i = 0; i < 100 && !res; ++i) {
    res = client.Get("/api/stories");
    if (!res) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(nlohmann::json::parse(res->body).size(), 2u);
  cli::request_stop();
  serving.join();
  EXPECT_EQ(code, 0);
  EXPECT_TRUE(contains(err.str(), "loaded 2 stories")) << err.str();
  EXPECT_TRUE(contains(err.str(), "skipped ")) << err.str();
  EXPECT_TRUE(contains(err.str(), "broken.focal.json")) << err.str();
}

TEST(CliServe, StartupFailures) {
  EXPECT_EQ(invoke({"serve", "--stories", (test::tests_dir() / "no-such-dir").string()}).code, 1);

  ServerOptions opts;
  opts.host = "127.0.0.1";
  opts.port = 0;
  HttpServer holder(std::make_shared<const ApiService>(StoryCatalog{}), opts);
  const int port = holder.bind();
  const CliRun busy = invoke({"serve", "--stories", fx("stories"), "--port", std::to_string(port), "--host", "127.0.0.1"});
  EXPECT_EQ(busy.code, 1);
  EXPECT_TRUE(contains(busy.err, "error: ")) << busy.err;
}

TEST(CliUsage, BadInvocations) {
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(invoke({"validate"}).code, 2);
  EXPECT_EQ(invoke({"--config", "/nonexistent.json", "validate", fx("sample.focal.json")}).code, 2);
  const CliRun help = invoke({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_TRUE(contains(help.out, "render")) << help.out;
}

TEST(CliBinary, ExitCodes) {
  const std::string bin = FOCAL_CLI_PATH;
  auto status = [&](const std::string& args) {
    const int s = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status("validate " + fx("sample.focal.json")), 0);
  EXPECT_EQ(status("validate " + fx("invalid/bit_range.focal.json")), 1);
  EXPECT_EQ(status("bogus"), 2);
}
