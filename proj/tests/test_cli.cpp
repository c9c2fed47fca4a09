#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& stdin_text = "") {
  std::string cmd = std::string(QCORR_CLI_PATH) + " " + args + " 2>/dev/null";
  if (!stdin_text.empty()) cmd = "printf '%b' '" + stdin_text + "' | " + cmd;
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string data(const std::string& name) { return std::string(QCORR_TEST_DATA) + "/" + name; }

// Finds the row of a CSV starting with `prefix`.
std::string row(const std::string& csv, const std::string& prefix) {
  const auto pos = csv.find("\n" + prefix);
  if (pos == std::string::npos) return "";
  const auto end = csv.find('\n', pos + 1);
  return csv.substr(pos + 1, end - pos - 1);
}

double last_field(const std::string& line) { return std::stod(line.substr(line.rfind(',') + 1)); }

}  // namespace

TEST(Cli, MeasuresWerner) {
  const auto r = run("measures --werner 0.8");
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j.at("schema"), "qcorr.report/1");
  EXPECT_NEAR(j.at("N").get<double>(), 0.7, 1e-10);
  EXPECT_NEAR(j.at("B").get<double>(), std::sqrt(0.28), 1e-10);
  EXPECT_EQ(j.at("regime").at("id"), 5);
}

TEST(Cli, MeasuresHybridRegime) {
  const auto r = run("measures --gws 0.85 0.1");
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_GT(j.at("S2").get<double>(), 2e-6);
  EXPECT_LT(j.at("B").get<double>(), 1e-8);
  EXPECT_EQ(j.at("regime").at("id"), 4);
}

TEST(Cli, MeasuresJsonState) {
  const auto r = run("measures --json " + data("maximally_mixed.json"));
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  for (const char* k : {"N", "C", "B", "S2", "S3"}) EXPECT_NEAR(j.at(k).get<double>(), 0.0, 1e-8) << k;
  EXPECT_EQ(j.at("regime").at("id"), 1);
}

TEST(Cli, MeasuresSdpTrace) {
  const std::string path = ::testing::TempDir() + "qcorr_trace.csv";
  ASSERT_EQ(run("measures --werner 0.7 --sdp-trace " + path).code, 0);
  FILE* f = std::fopen(path.c_str(), "r");
  ASSERT_NE(f, nullptr);
  char header[64] = {};
  ASSERT_NE(std::fgets(header, sizeof header, f), nullptr);
  std::fclose(f);
  EXPECT_EQ(std::string(header), "iteration,primal_objective,dual_objective,gap\n");
}

TEST(Cli, Thresholds) {
  const auto r = run("thresholds --q-range 0.1 0.9 --step 0.4 --measures N,S3,S2,B");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("# schema=qcorr.thresholds/1\nmeasure,q,p_threshold\n", 0), 0u);
  const double expected_half[] = {1.0 / 3.0, 1.0 / std::sqrt(3.0), 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
  const double expected_tenth[] = {5.0 / 11.0, 0.7390, 0.8370, 0.8575};
  const char* names[] = {"N", "S3", "S2", "B"};
  for (int k = 0; k < 4; ++k) {
    const std::string m = names[k];
    EXPECT_NEAR(last_field(row(r.out, m + ",0.5,")), expected_half[k], 2e-4) << m;
    EXPECT_NEAR(last_field(row(r.out, m + ",0.1,")), expected_tenth[k], 1e-3) << m;
    EXPECT_NEAR(last_field(row(r.out, m + ",0.9,")), last_field(row(r.out, m + ",0.1,")), 1e-4) << m;
  }
}

TEST(Cli, Table3) {
  const auto r = run("table3");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("Transition,q_opt,p_i(q_opt),p_f(q_opt),Delta_if(q_opt),Delta_if(1/2),"), std::string::npos);
  const auto a = row(r.out, "(a) p_B->p_N,");
  ASSERT_FALSE(a.empty());
  EXPECT_NEAR(std::stod(a.substr(a.find(',') + 1)), 0.1170, 2e-3);
  const auto e = row(r.out, "(e) p_S2->p_S3,");
  EXPECT_NEAR(std::stod(e.substr(e.find(',') + 1)), 0.5, 2e-3);
  const auto f = row(r.out, "(f) p_S3->p_N,");
  EXPECT_NEAR(std::stod(f.substr(f.find(',') + 1)), 0.0630, 2e-3);
}

TEST(Cli, TomoExamples) {
  const auto a = run("tomo --gws 0.8 0.1 --exposure 100000 --seed 7");
  ASSERT_EQ(a.code, 0);
  const auto ja = json::parse(a.out);
  EXPECT_EQ(ja.at("schema"), "qcorr.tomo/1");
  EXPECT_NEAR(ja.at("fit").at("p_est").get<double>(), 0.8, 0.03);
  EXPECT_EQ(ja.at("counts").at("rows").size(), 36u);
  const auto b = json::parse(run("tomo --werner 0.0 --exposure 100000 --seed 1").out);
  EXPECT_EQ(b.at("report").at("regime").at("id"), 1);
  const auto c = json::parse(run("tomo --gws 1 0.5 --exposure 100000 --seed 1").out);
  EXPECT_GE(c.at("report").at("N").get<double>(), 0.98);
}

TEST(Cli, TomoCountsCsv) {
  const std::string path = ::testing::TempDir() + "qcorr_counts.csv";
  ASSERT_EQ(run("tomo --werner 0.8 --exposure 1000 --seed 3 --counts-csv " + path).code, 0);
  FILE* f = std::fopen(path.c_str(), "r");
  ASSERT_NE(f, nullptr);
  int lines = 0;
  for (int ch; (ch = std::fgetc(f)) != EOF;) lines += ch == '\n';
  std::fclose(f);
  EXPECT_EQ(lines, 38);
}

TEST(Cli, Regimes) {
  const auto r = run("regimes " + data("pq.csv"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("# schema=qcorr.regimes/1\np,q,N,B,S2,S3,regime\n", 0), 0u);
  EXPECT_EQ(last_field(row(r.out, "0.2,0.5,")), 1);
  EXPECT_EQ(last_field(row(r.out, "0.65,0.5,")), 3);
  EXPECT_EQ(last_field(row(r.out, "0.85,0.1,")), 4);
  EXPECT_EQ(last_field(row(r.out, "0.9,0.5,")), 5);
  EXPECT_EQ(run("regimes -", "0.85,0.1\\n").out, "# schema=qcorr.regimes/1\np,q,N,B,S2,S3,regime\n" + row(r.out, "0.85,0.1,") + "\n");
}

TEST(Cli, ByteIdenticalReruns) {
  const std::vector<std::string> commands = {"measures --gws 0.9 0.2", "thresholds --step 0.2 --measures S3,S2",
                                             "tomo --gws 0.9 0.1 --seed 5 --exposure 10000",
                                             "regimes " + data("pq.csv")};
  for (const auto& args : commands) {
    const auto a = run(args), b = run(args);
    ASSERT_EQ(a.code, 0) << args;
    EXPECT_EQ(a.out, b.out) << args;
  }
}

TEST(Cli, JobsDoNotChangeOutput) {
  EXPECT_EQ(run("thresholds --step 0.1 --measures S3 --jobs 1").out,
            run("thresholds --step 0.1 --measures S3 --jobs 4").out);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("bogus").code, 2);
  EXPECT_EQ(run("measures").code, 2);
  EXPECT_EQ(run("measures --werner 0.8 --gws 0.5 0.5").code, 2);
  EXPECT_EQ(run("measures --werner abc").code, 2);
  EXPECT_EQ(run("thresholds --measures N,Q").code, 2);
  EXPECT_EQ(run("tomo --werner 0.5 --exposure -1").code, 2);
  EXPECT_EQ(run("measures --json " + data("malformed.json")).code, 2);
  EXPECT_EQ(run("measures --json " + data("does_not_exist.json")).code, 2);
  EXPECT_EQ(run("regimes -", "0.2,abc\\n").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, InvalidStatesExitThree) {
  EXPECT_EQ(run("measures --gws 1.5 0.1").code, 3);
  EXPECT_EQ(run("measures --werner -0.2").code, 3);
  EXPECT_EQ(run("measures --json " + data("not_psd.json")).code, 3);
  EXPECT_EQ(run("regimes -", "0.5,1.2\\n").code, 3);
}
