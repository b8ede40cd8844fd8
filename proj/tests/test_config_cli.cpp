#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ahc/config.hpp"
#include "ahc/errors.hpp"
#include "ahc/tag_io.hpp"

using namespace ahc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* kBundled[] = {"fig3a_250MHz", "fig3c_165MHz", "fig4_gm", "figS1_pulsed", "figS2_sweep"};

json bundled(const std::string& name) { return read_json_file(resolve_config_path(name)); }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ahc_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const fs::path& log_dir) {
  const std::string cmd = std::string(AHC_CLI_PATH) + " " + args + " >" + (log_dir / "stdout.txt").string() +
                          " 2>" + (log_dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// A short acquisition of the 250 MHz recipe keeps the end-to-end tests fast.
fs::path short_config(const fs::path& dir) {
  json doc = bundled("fig3a_250MHz");
  doc["simulation"]["duration_s"] = 20.0;
  const fs::path p = dir / "short.json";
  std::ofstream(p) << doc.dump(2);
  return p;
}

}  // namespace

TEST(Config, BundledRecipesAreValid) {
  for (const char* name : kBundled) {
    const json doc = bundled(name);
    EXPECT_TRUE(validate_config(doc).empty()) << name;
    EXPECT_NO_THROW(parse_config(doc)) << name;
  }
}

TEST(Config, NegativeLinewidthGivesOnePointer) {
  json doc = bundled("fig3a_250MHz");
  doc["source"]["signal"]["linewidth_hz"] = -1.0;
  const auto diags = validate_config(doc);
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].pointer, "/source/signal/linewidth_hz");
  try {
    parse_config(doc);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.pointer(), "/source/signal/linewidth_hz");
  }
}

TEST(Config, UnknownKeyIsNamed) {
  json doc = bundled("fig3a_250MHz");
  doc["analysis"]["bin_widht_s"] = 1e-9;
  const auto diags = validate_config(doc);
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_NE(diags[0].message.find("bin_widht_s"), std::string::npos);
  EXPECT_EQ(diags[0].pointer.rfind("/analysis", 0), 0u);
}

TEST(Config, SemanticChecks) {
  json doc = bundled("figS1_pulsed");
  doc["source"]["pump"].erase("sigma_hz");
  EXPECT_FALSE(validate_config(doc).empty());
  doc = bundled("fig3a_250MHz");
  doc["simulation"]["detectors"]["D"]["clock_tick_s"] = 1e-12;
  EXPECT_FALSE(validate_config(doc).empty());
  doc = bundled("fig3a_250MHz");
  doc["source"]["grid"]["diff_points"] = 1000;
  EXPECT_FALSE(validate_config(doc).empty());
}

TEST(Config, DigestTracksContent) {
  const json a = bundled("fig3a_250MHz");
  json b = a;
  b["seed"] = 1;
  EXPECT_EQ(config_digest(a), config_digest(a));
  EXPECT_NE(config_digest(a), config_digest(b));
  EXPECT_EQ(config_digest(a).rfind("sha256:", 0), 0u);
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Cli, ValidateExitCodes) {
  const fs::path dir = scratch("validate");
  EXPECT_EQ(run_cli("validate --config fig3a_250MHz", dir), 0);
  EXPECT_TRUE(json::parse(slurp(dir / "stdout.txt")).at("valid").get<bool>());
  json doc = bundled("fig3a_250MHz");
  doc["source"]["signal"]["linewidth_hz"] = -1.0;
  std::ofstream(dir / "bad.json") << doc.dump();
  EXPECT_EQ(run_cli("validate --config " + (dir / "bad.json").string(), dir), 2);
  EXPECT_EQ(json::parse(slurp(dir / "stdout.txt")).at("diagnostics").at(0).at("pointer"),
            "/source/signal/linewidth_hz");
  EXPECT_EQ(run_cli("fit --config " + (dir / "bad.json").string() + " --out " + dir.string(), dir), 2);
  EXPECT_EQ(json::parse(slurp(dir / "stderr.txt")).at("error").at("type"), "ConfigError");
  EXPECT_EQ(run_cli("no-such-command", dir), 2);
}

TEST(Cli, CorruptTagsExitWithParseError) {
  const fs::path dir = scratch("corrupt");
  std::ofstream(dir / "junk.ahctags") << "not a tag file";
  EXPECT_EQ(run_cli("correlate --config fig3a_250MHz --quiet --in " + (dir / "junk.ahctags").string() +
                        " --out " + dir.string(),
                    dir),
            3);
  EXPECT_EQ(json::parse(slurp(dir / "stderr.txt")).at("error").at("type"), "ParseError");
}

TEST(Cli, NormalizedReportsAreByteIdentical) {
  const fs::path a = scratch("repro_a"), b = scratch("repro_b");
  const fs::path cfg = short_config(a);
  const std::string common = "pipeline --quiet --normalize-timestamps --config " + cfg.string();
  ASSERT_EQ(run_cli(common + " --out " + a.string(), a), 0) << slurp(a / "stderr.txt");
  ASSERT_EQ(run_cli(common + " --out " + b.string(), b), 0) << slurp(b / "stderr.txt");
  const std::string ra = slurp(a / "report.json");
  EXPECT_FALSE(ra.empty());
  EXPECT_EQ(ra, slurp(b / "report.json"));
  EXPECT_EQ(slurp(a / "tags.ahctags"), slurp(b / "tags.ahctags"));
  EXPECT_EQ(slurp(a / "histogram_CD.csv"), slurp(b / "histogram_CD.csv"));
  const json rep = json::parse(ra);
  EXPECT_TRUE(rep.at("provenance").at("created_utc").is_null());
  EXPECT_EQ(rep.at("provenance").at("config_digest"), config_digest(read_json_file(cfg.string())));
}

TEST(Cli, StagesComposeLikeThePipeline) {
  const fs::path whole = scratch("whole"), staged = scratch("staged");
  const fs::path cfg = short_config(whole);
  ASSERT_EQ(run_cli("pipeline --quiet --config " + cfg.string() + " --out " + whole.string(), whole), 0);
  ASSERT_EQ(run_cli("simulate-tags --quiet --config " + cfg.string() + " --out " + staged.string(), staged), 0);
  const TimeTagStream tags = read_tags((staged / "tags.ahctags").string());
  EXPECT_GT(tags.records.size(), 1000u);
  EXPECT_EQ(tags.header.config_digest.rfind("sha256:", 0), 0u);
  ASSERT_EQ(run_cli("correlate --quiet --config " + cfg.string() + " --in " +
                        (staged / "tags.ahctags").string() + " --out " + staged.string(),
                    staged),
            0);
  const json piped = json::parse(slurp(staged / "histograms.json")).at("histograms").at("cross");
  const json embedded = json::parse(slurp(whole / "report.json")).at("histograms").at("cross");
  EXPECT_EQ(piped.at("counts"), embedded.at("counts"));
  EXPECT_GT(piped.at("total").get<std::uint64_t>(), 0u);
}

TEST(Cli, SeedOverrideChangesTags) {
  const fs::path a = scratch("seed_a"), b = scratch("seed_b");
  const fs::path cfg = short_config(a);
  ASSERT_EQ(run_cli("simulate-tags --quiet --config " + cfg.string() + " --out " + a.string(), a), 0);
  ASSERT_EQ(run_cli("simulate-tags --quiet --seed 5 --config " + cfg.string() + " --out " + b.string(), b), 0);
  EXPECT_NE(slurp(a / "tags.ahctags"), slurp(b / "tags.ahctags"));
}
