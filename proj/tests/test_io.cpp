#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "spongedim/io.hpp"

using namespace spongedim;

namespace {

const std::string kConfigDir = SPONGEDIM_CONFIG_DIR;
const std::string kCli = SPONGEDIM_CLI;

std::string config_error_message(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
    return e.what();
  }
  ADD_FAILURE() << "accepted: " << text;
  return {};
}

int exit_code(const std::string& args) {
  const int status = std::system((kCli + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string output_of(const std::string& args) {
  std::string out;
  std::FILE* p = ::popen((kCli + " " + args + " 2>&1").c_str(), "r");
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, p)) > 0;) out.append(buf, n);
  ::pclose(p);
  return out;
}

std::string write_temp(const std::string& name, const std::string& text) {
  const std::string path = ::testing::TempDir() + name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST(Config, ShippedConfigsParse) {
  for (const char* name : {"sponge_d3", "sponge_two_families", "sft_distinct_neighbours", "golden_mean", "full_alphabet"}) {
    const auto cfg = load_config(kConfigDir + "/" + name + ".json");
    EXPECT_NO_THROW(build_analysis(cfg)) << name;
  }
  const auto cfg = load_config(kConfigDir + "/sft_distinct_neighbours.json");
  EXPECT_EQ(cfg.expansion, (std::vector<int>{4, 3, 2}));
  EXPECT_EQ(cfg.kind, "sft");
  EXPECT_EQ(cfg.budgets.depth, 3);
  EXPECT_EQ(cfg.budgets.k_max, 8);
  EXPECT_EQ(cfg.budgets.seed, 1u);
  EXPECT_FALSE(cfg.outputs.report);
}

TEST(Config, RoundTrip) {
  auto cfg = load_config(kConfigDir + "/sft_distinct_neighbours.json");
  cfg.budgets.seed = 12345;
  cfg.outputs.dump = "samples.csv";
  EXPECT_EQ(parse_config(to_json(cfg).dump()), cfg);
  const auto golden = load_config(kConfigDir + "/golden_mean.json");
  EXPECT_EQ(parse_config(to_json(golden).dump(2)), golden);
}

TEST(Config, ReportEchoesConfig) {
  const auto cfg = load_config(kConfigDir + "/sponge_d3.json");
  const auto a = build_analysis(cfg);
  const auto doc = report_document(coincidence_report(a.x, a.spec, a.options), a, cfg, 0.25);
  EXPECT_EQ(parse_config(doc["config"].dump()), cfg);
  EXPECT_EQ(doc["tool_version"], kToolVersion);
  for (const char* key : {"kind", "d", "weak_spec_gap", "dim_box", "dim_box_symbolic", "dim_haus", "ly_dimension_of_mme", "verdict_A",
                          "verdict_C", "haus_measure_class", "witnesses", "fiber_profile", "full_dim_marginal"})
    EXPECT_TRUE(doc.contains(key)) << key;
  EXPECT_EQ(doc["verdict_A"], "Differ");
  EXPECT_EQ(doc["d"], 3);
  EXPECT_FALSE(doc.contains("pressure"));
  const auto sft = load_config(kConfigDir + "/sft_distinct_neighbours.json");
  const auto b = build_analysis(sft);
  const auto sdoc = report_document(coincidence_report(b.x, b.spec, b.options), b, sft, 0.25);
  for (const char* key : {"pressure", "agreement_depth", "fiber_ratios"}) EXPECT_TRUE(sdoc.contains(key)) << key;
  EXPECT_EQ(sdoc["pressure"]["estimates"].size(), 8u);
}

TEST(Config, RealsCarryFifteenDigits) {
  const auto cfg = load_config(kConfigDir + "/sponge_d3.json");
  const auto a = build_analysis(cfg);
  const auto doc = to_json(coincidence_report(a.x, a.spec, a.options), a.x, a.spec);
  const double box = doc["dim_box"].get<double>();
  EXPECT_EQ(box, std::stod(nlohmann::json(box).dump()));
  EXPECT_NEAR(box, std::log(360.0) / (12 * std::log(2.0)), 1e-14);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", std::log(360.0) / (12 * std::log(2.0)));
  EXPECT_EQ(box, std::strtod(buf, nullptr));
}

TEST(Config, MalformedDigitIsNamed) {
  const std::string msg = config_error_message(R"({"expansion": [4, 3, 2], "digits": [[0,0,0], [1,0,1], [2,2,1], [0,9,0]]})");
  EXPECT_NE(msg.find("digits[3] = (0,9,0)"), std::string::npos) << msg;
  EXPECT_NE(msg.find("coordinate 2"), std::string::npos) << msg;
  EXPECT_NE(config_error_message(R"({"expansion": [4, 2], "digits": [[0,0,0]]})").find("digits[0]"), std::string::npos);
}

TEST(Config, RejectsBadFields) {
  EXPECT_NE(config_error_message(R"({"expansion": [4.5, 2], "digits": [[0,0]]})").find("expansion[0]"), std::string::npos);
  EXPECT_NE(config_error_message(R"({"expansion": [4, 2], "digits": [[0,0]], "colour": 1})").find("colour"), std::string::npos);
  EXPECT_NE(config_error_message(R"({"expansion": [4, 2], "digits": [[0,0]], "kind": "sft"})").find("transition"), std::string::npos);
  EXPECT_NE(config_error_message(R"({"digits": [[0,0]]})").find("expansion"), std::string::npos);
  EXPECT_NE(config_error_message(R"({"expansion": [4, 2], "digits": [[0,0]], "budgets": {"depth": 0}})").find("budgets.depth"),
            std::string::npos);
  EXPECT_NE(config_error_message(R"({"expansion": [4, 2], "digits": [[0,0]], "budgets": {"seed": -1}})").find("budgets.seed"),
            std::string::npos);
  EXPECT_NE(config_error_message(R"({"expansion": [4, 2], "digits": [[0,0]],})").find("malformed"), std::string::npos);
}

TEST(Config, LibraryErrorsBecomeConfigErrors) {
  // Increasing bases.
  const auto cfg = parse_config(R"({"expansion": [2, 4], "digits": [[0,0]]})");
  try {
    build_analysis(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
  }
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(exit_code("report " + kConfigDir + "/golden_mean.json"), 0);
  EXPECT_EQ(exit_code("report " + write_temp("bad.json", R"({"expansion": [4, 2], "digits": [[5,0]]})")), 2);
  EXPECT_EQ(exit_code("report " + ::testing::TempDir() + "does_not_exist.json"), 2);
  EXPECT_EQ(exit_code("verify --suite nonsense"), 2);
  EXPECT_EQ(exit_code("sample --config " + kConfigDir + "/sft_distinct_neighbours.json --k 5 --n 10 --nu"), 3);
  EXPECT_EQ(exit_code("sample --config " + kConfigDir + "/sponge_d3.json --k 5 --n 10 --nu --delta 2"), 2);
}

TEST(Cli, CubeCountAndErrorText) {
  EXPECT_EQ(output_of("cubes --config " + kConfigDir + "/sponge_d3.json --k 4 --count").substr(0, 4), "360\n");
  const std::string err = output_of("report " + write_temp("bad2.json", R"({"expansion": [4, 2], "digits": [[0,7]]})"));
  EXPECT_NE(err.find("ConfigError"), std::string::npos) << err;
  EXPECT_NE(err.find("digits[0] = (0,7)"), std::string::npos) << err;
}

TEST(Cli, SampleDumpIsReproducible) {
  const std::string a = ::testing::TempDir() + "cli_a.csv", b = ::testing::TempDir() + "cli_b.csv";
  const std::string base = "sample --config " + kConfigDir + "/sponge_d3.json --k 30 --n 700 --seed 5 --dump ";
  ASSERT_EQ(exit_code(base + a), 0);
  ASSERT_EQ(exit_code(base + b), 0);
  std::ifstream fa(a), fb(b);
  const std::string ta((std::istreambuf_iterator<char>(fa)), {}), tb((std::istreambuf_iterator<char>(fb)), {});
  EXPECT_EQ(ta, tb);
  EXPECT_EQ(std::count(ta.begin(), ta.end(), '\n'), 701);
}
