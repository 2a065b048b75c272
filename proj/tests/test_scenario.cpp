#include <doctest.h>

#include <fstream>

#include "phishsim/io.hpp"
#include "phishsim/scenario.hpp"
#include "support.hpp"

using namespace phishsim;
using phishsim::testing::data_dir;
using phishsim::testing::TempDir;

namespace {

bool has_path(const std::vector<Diagnostic>& diags, const std::string& path) {
  for (const auto& d : diags)
    if (d.path == path) return true;
  return false;
}

std::string dump(const std::vector<Diagnostic>& diags) {
  std::string s;
  for (const auto& d : diags) s += to_string(d) + "\n";
  return s;
}

std::filesystem::path exp2() { return preset_path("exp2", data_dir()); }

}  // namespace

TEST_CASE("every preset validates cleanly") {
  for (auto name : kPresetNames) {
    const auto diags = validate_config(preset_path(name, data_dir()));
    INFO(name, "\n", dump(diags));
    CHECK(diags.empty());
  }
  CHECK_THROWS_AS(preset_path("exp9", data_dir()), InvalidArgument);
}

TEST_CASE("preset contents") {
  const auto e2 = load_config(exp2());
  CHECK(e2.name == "exp2");
  CHECK(e2.mode == RunMode::campaign);
  REQUIRE(e2.bots.size() == 2);
  CHECK(e2.bots[0].policy.version == PolicyVersion::v2);
  CHECK(e2.bots[0].quota == 33);
  CHECK(e2.bots[1].quota == 32);

  const auto e3 = load_config(preset_path("exp3", data_dir()));
  REQUIRE(e3.bots.size() == 3);
  CHECK(e3.bots[0].quota.value() + e3.bots[1].quota.value() + e3.bots[2].quota.value() == 741);
  const auto e4 = load_config(preset_path("exp4", data_dir()));
  REQUIRE(e4.bots.size() == 2);
  CHECK(e4.bots[0].policy.version == PolicyVersion::v4);
  CHECK(e4.bots[0].quota.value() - e3.bots[0].quota.value() == 17);

  const auto e1 = load_config(preset_path("exp1", data_dir()));
  CHECK(e1.mode == RunMode::capture);
  CHECK(e1.bots.empty());
}

TEST_CASE("missing keyword file names the field") {
  const std::vector<std::string> ov = {"keywords.sports=/nonexistent/sports.txt"};
  const auto diags = validate_config(exp2(), ov);
  INFO(dump(diags));
  CHECK(has_path(diags, "keywords.sports"));
  CHECK_THROWS_AS(load_config(exp2(), ov), ConfigError);
}

TEST_CASE("zero or negative duration is diagnosed") {
  for (const char* ov : {"duration_hours=0", "duration_hours=-3"}) {
    const std::vector<std::string> o = {ov};
    const auto diags = validate_config(exp2(), o);
    INFO(ov, "\n", dump(diags));
    CHECK(has_path(diags, "duration_hours"));
  }
}

TEST_CASE("unknown fields, bad types and bad overrides") {
  SUBCASE("unknown top-level field") {
    const std::vector<std::string> o = {"colour=blue"};
    CHECK(has_path(validate_config(exp2(), o), "colour"));
  }
  SUBCASE("unknown victim coefficient") {
    const std::vector<std::string> o = {"victim.beta.height=1"};
    const auto diags = validate_config(exp2(), o);
    INFO(dump(diags));
    CHECK_FALSE(diags.empty());
  }
  SUBCASE("quota of the wrong type") {
    const std::vector<std::string> o = {"bots.0.quota=lots"};
    CHECK(has_path(validate_config(exp2(), o), "bots.0.quota"));
  }
  SUBCASE("probability out of range") {
    const std::vector<std::string> o = {"victim.complaint_prob=2"};
    const auto diags = validate_config(exp2(), o);
    INFO(dump(diags));
    CHECK_FALSE(diags.empty());
  }
  SUBCASE("override without a value") {
    const std::vector<std::string> o = {"seed"};
    CHECK(has_path(validate_config(exp2(), o), "--override"));
  }
  SUBCASE("override into a missing list element") {
    const std::vector<std::string> o = {"bots.7.quota=3"};
    CHECK(has_path(validate_config(exp2(), o), "bots.7.quota"));
  }
  SUBCASE("unreadable config") {
    CHECK_FALSE(validate_config("/nonexistent/config.yaml").empty());
  }
}

TEST_CASE("every diagnostic is collected, not just the first") {
  const std::vector<std::string> o = {"duration_hours=0", "colour=blue", "keywords.sports=/nope.txt"};
  try {
    load_config(exp2(), o);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(has_path(e.diagnostics(), "duration_hours"));
    CHECK(has_path(e.diagnostics(), "colour"));
    CHECK(has_path(e.diagnostics(), "keywords.sports"));
    CHECK(std::string(e.what()).find("duration_hours") != std::string::npos);
  }
}

TEST_CASE("overrides apply") {
  const std::vector<std::string> o = {"seed=42", "bots.1.quota=5", "detection.rate_threshold=7"};
  const auto cfg = load_config(exp2(), o);
  CHECK(cfg.seed == 42);
  CHECK(cfg.bots[1].quota == 5);
  CHECK(cfg.detection.rate_threshold == 7);
}

TEST_CASE("relative paths resolve against the config file") {
  TempDir dir("scenario");
  const auto copy = dir.path() / "mine.yaml";
  std::filesystem::copy_file(exp2(), copy);
  // The copied preset's relative paths now point nowhere.
  CHECK(has_path(validate_config(copy), "keywords.sports"));
}

TEST_CASE("resolved snapshot loads back to the same configuration") {
  TempDir dir("snapshot");
  for (auto name : kPresetNames) {
    const auto cfg = load_config(preset_path(name, data_dir()));
    const std::string yaml = to_yaml(cfg);
    const auto file = dir.path() / (std::string(name) + ".yaml");
    io::write_file(file, yaml);
    const auto back = load_config(file);
    CHECK(to_yaml(back) == yaml);
    CHECK(back.seed == cfg.seed);
    CHECK(back.bots.size() == cfg.bots.size());
    CHECK(back.victim.beta == cfg.victim.beta);
    CHECK(back.keyword_files == cfg.keyword_files);
  }
}

TEST_CASE("keyword lists") {
  const auto kw = load_keywords(load_config(exp2()));
  for (Theme t : kAllThemes) {
    REQUIRE(kw.count(t) == 1);
    CHECK(kw.at(t).size() == 30);
  }
}
