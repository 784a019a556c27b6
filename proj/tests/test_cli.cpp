#include <gtest/gtest.h>
#include <httplib.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "support.hpp"
#include "tscreen/config.hpp"

namespace {

using tscreen::testing::read_file;

struct Run {
  int exit_code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(TSCREEN_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  while (auto n = std::fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string data(const char* name) { return std::string(TSCREEN_DATA_DIR) + "/" + name; }

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ::setenv("SOURCE_DATE_EPOCH", "1200000000", 1);
    dir_ = tscreen::testing::scratch_dir("cli");
    ASSERT_EQ(run("synth " + data("synth_injection.json") + " -o " + dir_ + "/events.csv").exit_code, 0);
  }
  static std::string dir_;
};
std::string Cli::dir_;

TEST_F(Cli, IngestRawFile) {
  std::ofstream(dir_ + "/raw.csv") << "date,age,gender,state,municipality,scene,perpetrator\n"
                                      "2008-01-02,13,F,La Unión,Conchagua,casa de la victima,novio\n"
                                      "2008-01-03,bad,F,La Unión,Conchagua,otro,novio\n";
  auto r = run("ingest " + dir_ + "/raw.csv -o " + dir_ + "/canon.csv --schema-out " + dir_ + "/schema.json");
  ASSERT_EQ(r.exit_code, 0);
  auto summary = nlohmann::json::parse(r.out);
  EXPECT_EQ(summary["total"], 1);
  EXPECT_EQ(summary["rejected_rows"], 1);
  EXPECT_EQ(read_file(dir_ + "/canon.csv"),
            "date,age,gender,state,municipality,scene,perpetrator\n"
            "2008-01-02,13,female,LA UNION,CONCHAGUA,victim's house,boyfriend\n");
  auto schema = tscreen::Schema::load(dir_ + "/schema.json");
  EXPECT_FALSE(schema.has_open_domains());
}

TEST_F(Cli, IngestEmptyFileSucceeds) {
  std::ofstream(dir_ + "/empty.csv").flush();
  auto r = run("ingest " + dir_ + "/empty.csv");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out)["total"], 0);
}

TEST_F(Cli, IngestMalformedHeaderFails) {
  std::ofstream(dir_ + "/bad.csv") << "when,who\n2008-01-01,x\n";
  EXPECT_NE(run("ingest " + dir_ + "/bad.csv").exit_code, 0);
  EXPECT_NE(run("ingest " + dir_ + "/missing.csv").exit_code, 0);
}

TEST_F(Cli, ScreenWritesTableShapedOutputs) {
  auto r = run("screen " + dir_ + "/events.csv -c " + data("screen_injection.json") + " --stride 7 -o " + dir_ + "/inj");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("States"), std::string::npos);
  const auto csv = read_file(dir_ + "/inj.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "states,end_date,p_value,count,expected_count");
  const auto second_line = csv.substr(csv.find('\n') + 1, csv.find('\n', csv.find('\n') + 1) - csv.find('\n') - 1);
  EXPECT_TRUE(second_line.find("LA UNION") != std::string::npos || second_line.find("MORAZAN") != std::string::npos ||
              second_line.find("SAN MIGUEL") != std::string::npos)
      << second_line;

  auto manifest = nlohmann::json::parse(read_file(dir_ + "/inj.manifest.json"));
  std::istringstream jsonl(read_file(dir_ + "/inj.jsonl"));
  std::string line;
  ASSERT_TRUE(std::getline(jsonl, line));
  EXPECT_EQ(nlohmann::json::parse(line)["run"], manifest["config_digest"]);
  EXPECT_EQ(manifest["config"]["stride"], 7);
  EXPECT_EQ(manifest["inputs"][0]["sha256"], tscreen::sha256_file(dir_ + "/events.csv"));

  // Reruns are byte-identical.
  ASSERT_EQ(run("screen " + dir_ + "/events.csv -c " + data("screen_injection.json") + " --stride 7 -q -o " + dir_ +
                "/inj2")
                .exit_code,
            0);
  EXPECT_EQ(read_file(dir_ + "/inj.jsonl"), read_file(dir_ + "/inj2.jsonl"));
  EXPECT_EQ(read_file(dir_ + "/inj.csv"), read_file(dir_ + "/inj2.csv"));
}

TEST_F(Cli, ProspectiveOutputIgnoresAppendedFutureEvents) {
  const auto events = read_file(dir_ + "/events.csv");
  std::istringstream in(events);
  std::ostringstream past;
  std::string line;
  std::getline(in, line);
  past << line << '\n';
  while (std::getline(in, line)) {
    if (line.substr(0, 10) <= "2010-06-20") past << line << '\n';
  }
  std::ofstream(dir_ + "/past.csv") << past.str();
  const std::string flags = " -c " + data("screen_injection.json") + " --prospective --frontier 2010-06-20 -q -o ";
  ASSERT_EQ(run("screen " + dir_ + "/past.csv" + flags + dir_ + "/p1").exit_code, 0);
  ASSERT_EQ(run("screen " + dir_ + "/events.csv" + flags + dir_ + "/p2").exit_code, 0);
  EXPECT_EQ(read_file(dir_ + "/p1.jsonl"), read_file(dir_ + "/p2.jsonl"));
  EXPECT_EQ(read_file(dir_ + "/p1.csv"), read_file(dir_ + "/p2.csv"));
  EXPECT_FALSE(read_file(dir_ + "/p1.jsonl").empty());
}

TEST_F(Cli, SnapshotServesSameResults) {
  ASSERT_EQ(run("snapshot " + dir_ + "/events.csv -o " + dir_ + "/cube.bin").exit_code, 0);
  const std::string flags = " -c " + data("screen_injection.json") + " --stride 14 -q -o ";
  ASSERT_EQ(run("screen " + dir_ + "/cube.bin" + flags + dir_ + "/s1").exit_code, 0);
  ASSERT_EQ(run("screen " + dir_ + "/events.csv" + flags + dir_ + "/s2").exit_code, 0);
  EXPECT_EQ(read_file(dir_ + "/s1.csv"), read_file(dir_ + "/s2.csv"));
}

TEST_F(Cli, PivotFormats) {
  auto r = run("pivot " + dir_ + "/events.csv --row state --col perpetrator --format json");
  ASSERT_EQ(r.exit_code, 0);
  auto j = nlohmann::json::parse(r.out);
  for (std::size_t i = 0; i < j["cells"].size(); ++i) {
    if (j["zero_rows"][i]) continue;
    double sum = 0;
    for (double v : j["cells"][i]) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
  r = run("pivot " + dir_ + "/events.csv --row state --col gender --format csv -o " + dir_ + "/pivot.csv");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(read_file(dir_ + "/pivot.csv").substr(0, 12), "state\\gender");
  EXPECT_EQ(run("pivot " + dir_ + "/events.csv --row state --col state").exit_code, 1);
  EXPECT_EQ(run("pivot " + dir_ + "/events.csv --row state --col scene --filter '{\"state\": \"LA PAZ\"}'").exit_code, 1);
  EXPECT_EQ(run("pivot " + dir_ + "/events.csv --row scene --col perpetrator --filter '{\"state\": \"LA PAZ\"}'").exit_code,
            0);
}

TEST_F(Cli, WatchEmitsOnlyNewFrontiers) {
  const auto events = read_file(dir_ + "/events.csv");
  std::istringstream in(events);
  std::string header, line;
  std::getline(in, header);
  std::ostringstream history, appended;
  history << header << '\n';
  appended << header << '\n';
  while (std::getline(in, line)) {
    const auto date = line.substr(0, 10);
    if (date <= "2010-05-31") {
      history << line << '\n';
    } else if (date <= "2010-06-28") {
      appended << line << '\n';
    }
  }
  std::ofstream(dir_ + "/history.csv") << history.str();
  std::ofstream(dir_ + "/none.csv") << header << '\n';
  std::ofstream(dir_ + "/appended.csv") << appended.str();
  auto quiet = run("watch " + dir_ + "/history.csv " + dir_ + "/none.csv -c " + data("screen_injection.json"));
  EXPECT_EQ(quiet.exit_code, 0);
  EXPECT_EQ(quiet.out, "");

  auto r = run("watch " + dir_ + "/history.csv " + dir_ + "/appended.csv -c " + data("screen_injection.json"));
  ASSERT_EQ(r.exit_code, 0);
  std::istringstream alerts(r.out);
  bool east = false;
  int n = 0;
  while (std::getline(alerts, line)) {
    auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["frontier"], j["window_end"]);
    EXPECT_GT(j["frontier"].get<std::string>(), std::string("2010-05-31"));
    if (!j["region"].is_null()) {
      for (const auto& m : j["region"]) east = east || m == "LA UNION" || m == "MORAZAN" || m == "SAN MIGUEL";
    }
    ++n;
  }
  EXPECT_GT(n, 0);
  EXPECT_TRUE(east);
}

TEST_F(Cli, ServeFailsOnBusyPort) {
  httplib::Server blocker;
  const int port = blocker.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  EXPECT_NE(run("serve " + dir_ + "/events.csv --port " + std::to_string(port)).exit_code, 0);
}

TEST_F(Cli, SchemaAndUsage) {
  auto r = run("schema");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(tscreen::Schema::from_json(nlohmann::json::parse(r.out)), tscreen::default_schema());
  EXPECT_NE(run("").exit_code, 0);
  EXPECT_NE(run("screen").exit_code, 0);
  EXPECT_EQ(run("--version").out, std::string(tscreen::kToolVersion) + "\n");
}

}  // namespace
