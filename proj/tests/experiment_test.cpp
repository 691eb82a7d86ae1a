#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "twocopy/experiment.hpp"

namespace twocopy {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json qubit_config(double w01, double q, json shots) {
  return {{"channel", {{"type", "explicit"}, {"d", 2}, {"omega", {1.0, w01, w01, 1.0}}}},
          {"probe", {{"type", "werner"}, {"q", q}}},
          {"scheme", "swap"},
          {"shots", shots},
          {"seed", 42}};
}

json qutrit_gamma_config() {
  return {{"channel", {{"type", "double_commutator"}, {"energies", {0.0, 1.0, 2.0}}, {"gamma", 1.0}}},
          {"probe", {{"type", "werner"}, {"q", 1.0}}},
          {"scheme", "swap"},
          {"shots", "exact"},
          {"seed", 1},
          {"gamma_fit", {{"delta", 1.0}, {"hbar", 1.0}, {"d", 3}}}};
}

TEST(JsonChannel, ExplicitLayouts) {
  const json flat = {{"type", "explicit"}, {"d", 2}, {"omega", {1, json::array({0.3, 0.4}), json::array({0.3, -0.4}), 1}}};
  const json rows = {{"type", "explicit"},
                     {"d", 2},
                     {"omega", {{1, json::array({0.3, 0.4})}, {json::array({0.3, -0.4}), 1}}}};
  const auto a = json_io::channel_from_json(flat);
  const auto b = json_io::channel_from_json(rows);
  EXPECT_EQ(a.omega()(0, 1), Complex(0.3, 0.4));
  EXPECT_EQ(a.omega(), b.omega());
}

TEST(JsonChannel, OtherTypes) {
  const auto dc = json_io::channel_from_json(
      {{"type", "double_commutator"}, {"energies", {0.0, 1.0}}, {"gamma", 0.5}, {"hbar", 1.0}, {"time", 2.0}});
  EXPECT_NEAR(std::abs(dc.omega()(0, 1)), std::exp(-2.0), 1e-15);
  const auto mix = json_io::channel_from_json({{"type", "qubit_mixture"}, {"p", 1.0}, {"a", 0.0}, {"b", 1.0}});
  EXPECT_NEAR(std::abs(mix.omega()(0, 1)), 1.0, 1e-15);
}

TEST(JsonChannel, Errors) {
  EXPECT_THROW(json_io::channel_from_json({{"type", "explicit"}, {"d", 2}, {"omega", {1, 1.5, 1.5, 1}}}), ConfigError);
  EXPECT_THROW(json_io::channel_from_json({{"type", "explicit"}, {"d", 2}, {"omega", {1, 0, 0}}}), ConfigError);
  EXPECT_THROW(json_io::channel_from_json({{"type", "explicit"}, {"d", 2}, {"omega", {1, 0, 0, 1}}, {"extra", 1}}),
               ConfigError);
  EXPECT_THROW(json_io::channel_from_json({{"type", "lindblad"}}), ConfigError);
  EXPECT_THROW(json_io::channel_from_json({{"type", "double_commutator"}, {"energies", {0.0, 1.0}}, {"gamma", -1.0}}),
               ConfigError);
}

TEST(ParseConfig, RejectsUnknownKeysAndBadValues) {
  json c = qubit_config(0.6, 0.9, "exact");
  c["colour"] = "blue";
  EXPECT_THROW(parse_config(c), ConfigError);

  c = qubit_config(0.6, 0.9, "exact");
  c["probe"]["weight"] = 1;
  EXPECT_THROW(parse_config(c), ConfigError);

  EXPECT_THROW(parse_config(qubit_config(0.6, 0.9, 0)), ConfigError);
  EXPECT_THROW(parse_config(qubit_config(0.6, 0.9, "many")), ConfigError);
  EXPECT_THROW(parse_config(qubit_config(0.6, 1.2, "exact")), ConfigError);

  c = qubit_config(0.6, 0.9, "exact");
  c["scheme"] = "swap_test";
  EXPECT_THROW(parse_config(c), ConfigError);
}

TEST(ParseConfig, SchemeDimensionCompatibility) {
  json c = qutrit_gamma_config();
  c.erase("probe");
  c["scheme"] = "qubit_z";
  c.erase("gamma_fit");
  EXPECT_THROW(parse_config(c), ConfigError);

  c = qubit_config(0.6, 0.9, "exact");
  c["scheme"] = "qubit_z";
  EXPECT_THROW(parse_config(c), ConfigError);  // probe is fixed by the scheme
  c.erase("probe");
  EXPECT_NO_THROW(parse_config(c));

  c = qutrit_gamma_config();
  c["gamma_fit"]["d"] = 4;
  EXPECT_THROW(parse_config(c), ConfigError);
}

TEST(Run, QubitExactEstimate) {
  const auto report = run(qubit_config(0.6, 0.9, "exact"));
  EXPECT_NEAR(report.avg_lambda_squared, 0.36, 1e-10);
  ASSERT_EQ(report.estimates.size(), 2u);
  EXPECT_NEAR(report.estimates[1].value, 0.6, 1e-10);
  EXPECT_FALSE(report.measurements[0].std_error.has_value());
}

TEST(Run, QutritGammaFit) {
  const auto report = run(qutrit_gamma_config());
  ASSERT_TRUE(report.gamma.has_value());
  EXPECT_NEAR(report.gamma->gamma, 1.0, 1e-8);
  EXPECT_NEAR(report.gamma->lambda_jk(0, 2), std::exp(-2.0), 1e-8);
}

TEST(Run, IdentityChannelWithShots) {
  json c = qubit_config(1.0, 0.9, 10000);
  c["channel"] = {{"type", "explicit"}, {"d", 3}, {"omega", json::array({1, 1, 1, 1, 1, 1, 1, 1, 1})}};
  const auto report = run(c);
  const auto& est = report.estimates.front();
  ASSERT_TRUE(est.std_error.has_value());
  EXPECT_LE(std::abs(est.value - 1.0), 5 * *est.std_error);
}

TEST(Run, SingularProbeRefused) {
  EXPECT_THROW(run(qubit_config(0.6, 0.75, "exact")), SingularConfigurationError);
  json c = qutrit_gamma_config();
  c["probe"]["q"] = 2.0 / 3.0;
  EXPECT_THROW(run(c), SingularConfigurationError);
  // A maximally mixed qubit source lands on the singular weight too.
  c = qubit_config(0.6, 0.9, "exact");
  c["probe"] = {{"type", "twirled_source"}, {"eta", {0.5, 0.5}}, {"twirl", {{"mode", "exact-design"}}}};
  EXPECT_THROW(run(c), SingularConfigurationError);
}

TEST(Run, TwirledSourceProbe) {
  json c = qubit_config(0.6, 0.9, "exact");
  c["probe"] = {{"type", "twirled_source"}, {"eta", {0.9, 0.1}}, {"twirl", {{"mode", "exact-design"}}}};
  const auto report = run(c);
  EXPECT_NEAR(*report.probe_q, 0.91, 1e-15);
  EXPECT_NEAR(report.avg_lambda_squared, 0.36, 1e-10);
}

TEST(Run, QubitSchemesAgree) {
  json c = qubit_config(0.6, 0.9, "exact");
  c["channel"]["omega"] = {1, json::array({0.3, -0.5}), json::array({0.3, 0.5}), 1};
  c.erase("probe");
  const double expected = 0.34;
  for (const char* scheme : {"qubit_z", "qubit_xy", "ppovm"}) {
    c["scheme"] = scheme;
    EXPECT_NEAR(run(c).avg_lambda_squared, expected, 1e-12) << scheme;
  }
}

TEST(Run, GammaBoundaryReported) {
  json c = qutrit_gamma_config();
  c["channel"] = {{"type", "explicit"}, {"d", 3}, {"omega", json::array({1, 1, 1, 1, 1, 1, 1, 1, 1})}};
  const auto report = run(c);
  EXPECT_FALSE(report.gamma.has_value());
  ASSERT_TRUE(report.gamma_boundary.has_value());
  EXPECT_EQ(*report.gamma_boundary, "gamma_infinite");
  EXPECT_EQ(to_json(report)["gamma"]["boundary"], "gamma_infinite");
}

TEST(Report, SchemaIsStable) {
  const auto exact = to_json(run(qubit_config(0.6, 0.9, "exact")));
  const auto sampled = to_json(run(qutrit_gamma_config()));
  for (const char* key :
       {"toolkit", "version", "config", "probe_q", "measurements", "estimates", "avg_lambda_squared", "gamma",
        "wall_time_s"}) {
    EXPECT_TRUE(exact.contains(key)) << key;
    EXPECT_TRUE(sampled.contains(key)) << key;
  }
  EXPECT_TRUE(exact["gamma"].is_null());
  EXPECT_EQ(exact["measurements"][0]["shots"], "exact");
}

TEST(Report, DeterministicUnderSeed) {
  auto a = to_json(run(qubit_config(0.6, 0.9, 5000)));
  auto b = to_json(run(qubit_config(0.6, 0.9, 5000)));
  a.erase("wall_time_s");
  b.erase("wall_time_s");
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(Sweep, ShotsScaling) {
  const auto reports = sweep(qubit_config(0.6, 0.9, 100), "shots", {100, 1000, 10000});
  ASSERT_EQ(reports.size(), 3u);
  for (std::size_t i = 0; i + 1 < reports.size(); ++i) {
    const double ratio = *reports[i].measurements[0].std_error / *reports[i + 1].measurements[0].std_error;
    EXPECT_GT(ratio, std::sqrt(10.0) / 1.5);
    EXPECT_LT(ratio, std::sqrt(10.0) * 1.5);
  }
  // Derived seeds differ between runs.
  EXPECT_NE(reports[0].measurements[0].seed->value, reports[1].measurements[0].seed->value);
}

TEST(Sweep, ExactEstimateIndependentOfWeight) {
  const auto reports = sweep(qubit_config(0.6, 0.9, "exact"), "probe.q", {0.8, 0.9, 1.0});
  for (const auto& r : reports) EXPECT_NEAR(r.avg_lambda_squared, 0.36, 1e-10);
}

TEST(Sweep, GammaGridIsMonotone) {
  json c = qutrit_gamma_config();
  c.erase("gamma_fit");
  const auto reports = sweep(c, "channel.gamma", {0.1, 0.3, 1.0, 3.0, 10.0});
  for (std::size_t i = 0; i + 1 < reports.size(); ++i) {
    EXPECT_LT(reports[i].avg_lambda_squared, reports[i + 1].avg_lambda_squared);
  }
}

TEST(Sweep, ArrayPathAndErrors) {
  json c = qutrit_gamma_config();
  c.erase("gamma_fit");
  EXPECT_EQ(sweep(c, "channel.energies.2", {3.0}).size(), 1u);
  EXPECT_THROW(sweep(c, "channel.energies.7", {1.0}), ConfigError);
  EXPECT_THROW(sweep(c, "probe.weight", {1.0}), ConfigError);
  EXPECT_THROW(sweep(c, "scheme", {1.0}), ConfigError);
}

TEST(Sweep, CsvColumns) {
  const std::vector<double> values{0.8, 1.0};
  const auto csv = sweep_csv(values, sweep(qubit_config(0.6, 0.9, "exact"), "probe.q", values));
  std::istringstream in(csv);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header, "param_value,mean,std_error,estimate");
  EXPECT_EQ(first.substr(0, 4), "0.8,");
}

// --- command-line front end -------------------------------------------------

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("twocopy_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const json& content) {
    const auto path = (dir_ / name).string();
    std::ofstream(path) << content.dump();
    return path;
  }

  static int invoke(const std::string& args) {
    const std::string cmd = std::string(TWOCOPY_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  }

  static json read(const fs::path& path) {
    std::ifstream in(path);
    return json::parse(in);
  }

  fs::path dir_;
};

TEST_F(Cli, RunWritesReport) {
  const auto cfg = write("cfg.json", qubit_config(0.6, 0.9, "exact"));
  const auto out = (dir_ / "report.json").string();
  ASSERT_EQ(invoke("run --config " + cfg + " --out " + out), 0);
  EXPECT_NEAR(read(out)["avg_lambda_squared"].get<double>(), 0.36, 1e-10);
}

TEST_F(Cli, ExitCodes) {
  json bad = qubit_config(0.6, 0.9, "exact");
  bad["unexpected"] = true;
  EXPECT_EQ(invoke("run --config " + write("bad.json", bad)), 2);
  EXPECT_EQ(invoke("run --config " + (dir_ / "missing.json").string()), 2);
  EXPECT_EQ(invoke("run"), 2);
  EXPECT_EQ(invoke("run --config " + write("singular.json", qubit_config(0.6, 0.75, "exact"))), 3);
  EXPECT_EQ(invoke("sweep --config " + write("ok.json", qubit_config(0.6, 0.9, "exact")) +
                   " --param probe.nothing --values 1"),
            2);
}

TEST_F(Cli, IdenticalInvocationsGiveIdenticalReports) {
  const auto cfg = write("cfg.json", qubit_config(0.6, 0.9, 20000));
  const auto a = (dir_ / "a.json").string(), b = (dir_ / "b.json").string();
  ASSERT_EQ(invoke("run --config " + cfg + " --out " + a), 0);
  ASSERT_EQ(invoke("run --config " + cfg + " --out " + b), 0);
  json ja = read(a), jb = read(b);
  ja.erase("wall_time_s");
  jb.erase("wall_time_s");
  EXPECT_EQ(ja.dump(), jb.dump());
}

TEST_F(Cli, SweepPurityAndTwirlCheck) {
  const auto cfg = write("cfg.json", qubit_config(0.6, 0.9, "exact"));
  const auto csv = (dir_ / "t.csv").string();
  ASSERT_EQ(invoke("sweep --config " + cfg + " --param probe.q --values 0.8,0.9 --csv " + csv + " --out " +
                   (dir_ / "s.json").string()),
            0);
  EXPECT_EQ(read(dir_ / "s.json")["runs"].size(), 2u);

  const auto eta = write("eta.json", json{{"eta", {0.9, 0.1}}});
  ASSERT_EQ(invoke("purity --eta " + eta + " --shots 1000 --out " + (dir_ / "p.json").string()), 0);
  EXPECT_NEAR(read(dir_ / "p.json")["purity_exact"].get<double>(), 0.82, 1e-15);

  ASSERT_EQ(invoke("twirl-check --d 2 --samples 2000 --out " + (dir_ / "t.json").string()), 0);
  const auto tc = read(dir_ / "t.json");
  EXPECT_EQ(tc["exact_design"]["size"], 24);
  EXPECT_LE(tc["exact_design"]["trace_distance_to_werner"].get<double>(), 1e-12);
}

}  // namespace
}  // namespace twocopy
