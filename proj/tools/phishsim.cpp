// phishsim: run presets or config files, validate configs, serve the
// landing page for manual inspection.

#include <csignal>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "phishsim/campaign.hpp"
#include "phishsim/landing.hpp"
#include "phishsim/scenario.hpp"

namespace fs = std::filesystem;
using namespace phishsim;

namespace {

volatile std::sig_atomic_t g_stop = 0;

void print_diagnostics(const std::vector<Diagnostic>& diags) {
  for (const Diagnostic& d : diags) std::cerr << "config error: " << to_string(d) << '\n';
}

struct Source {
  std::string preset;
  std::string config;
  std::string data_dir;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;

  fs::path path() const {
    if (!config.empty()) return config;
    return preset_path(preset, data_dir.empty() ? default_data_dir() : fs::path(data_dir));
  }
  std::vector<std::string> all_overrides() const {
    std::vector<std::string> out = overrides;
    if (seed) out.push_back("seed=" + std::to_string(*seed));
    return out;
  }
};

void add_source_options(CLI::App* cmd, Source& src) {
  auto* preset = cmd->add_option("--preset", src.preset, "Preset name")
                     ->check(CLI::IsMember({"exp1", "exp2", "exp3", "exp4"}));
  auto* config = cmd->add_option("--config", src.config, "Scenario config file");
  preset->excludes(config);
  cmd->add_option("--seed", src.seed, "Override the scenario seed");
  cmd->add_option("--override", src.overrides, "Dotted key=value override (repeatable)");
  cmd->add_option("--data-dir", src.data_dir, "Directory holding presets/");
}

int do_run(const Source& src, const std::string& out_arg, bool emergent) {
  const auto overrides = src.all_overrides();
  ScenarioConfig cfg;
  try {
    cfg = load_config(src.path(), overrides);
  } catch (const ConfigError& e) {
    print_diagnostics(e.diagnostics());
    return 2;
  }
  if (emergent)
    for (BotConfig& b : cfg.bots) b.quota.reset();
  const fs::path out = out_arg.empty() ? fs::path("runs") / (cfg.name + "-" + std::to_string(cfg.seed))
                                       : fs::path(out_arg);
  const CampaignResult result = run_campaign(cfg);
  write_artifacts(result, out);
  std::cout << summary_text(result) << "artifacts in " << out.string() << '\n';
  return 0;
}

int do_validate(const Source& src) {
  const auto diags = validate_config(src.path(), src.all_overrides());
  if (diags.empty()) {
    std::cout << "ok\n";
    return 0;
  }
  print_diagnostics(diags);
  return 2;
}

int do_serve(const std::string& data_dir, int port) {
  LandingService service(LandingContent::load(data_dir.empty() ? default_data_dir() : fs::path(data_dir)));
  LandingHttpServer server(service);
  const int bound = server.start(port);
  std::cout << "landing page on http://127.0.0.1:" << bound << " (Ctrl-C to stop)\n" << std::flush;
  std::signal(SIGINT, [](int) { g_stop = 1; });
  std::signal(SIGTERM, [](int) { g_stop = 1; });
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  std::cout << to_json(service.snapshot()).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline phishing-campaign simulator"};
  app.require_subcommand(1);

  Source run_src;
  std::string out;
  bool emergent = false;
  auto* run = app.add_subcommand("run", "Run a scenario and write its artifacts");
  add_source_options(run, run_src);
  run->add_option("--out", out, "Output directory (default runs/<name>-<seed>)");
  run->add_flag("--emergent", emergent, "Drop the per-bot quotas; bots attack whatever they sample");

  Source val_src;
  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  add_source_options(validate, val_src);

  std::string serve_dir;
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "Serve the landing page on localhost");
  serve->add_option("--data-dir", serve_dir, "Data directory");
  serve->add_option("--port", port, "Port, 0 for any");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (run_src.preset.empty() && run_src.config.empty()) throw CLI::RequiredError("--preset or --config");
      return do_run(run_src, out, emergent);
    }
    if (*validate) {
      if (val_src.preset.empty() && val_src.config.empty()) throw CLI::RequiredError("--preset or --config");
      return do_validate(val_src);
    }
    return do_serve(serve_dir, port);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
