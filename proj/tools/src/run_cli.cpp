#include "lowmach_cli/cli.hpp"

#include "lowmach/report_io.hpp"

#include <CLI11.hpp>

#include <ostream>
#include <sstream>

namespace lowmach::cli {

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Low Mach limit diagnostics: solver ladders, Young measures, wave cone and Jensen checks"};
  app.require_subcommand(0, 1);
  app.set_version_flag("--version", [] { return version_text(); }, "Print version and schema versions");

  CliConfig cfg;
  for (const auto& name : subcommands()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " pipeline");
    sub->add_option("-c,--config", cfg.config_path, "TOML or JSON configuration file");
    sub->add_option("-o,--output-dir", cfg.output_dir, "directory for reports and artifacts")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "seed for every randomised estimator")->capture_default_str();
    sub->add_option("--threads", cfg.threads, "worker thread cap")->capture_default_str();
    sub->add_flag("--dry-run", cfg.dry_run, "validate the configuration and print the plan");
    sub->add_flag("-v,--verbose", cfg.verbosity, "progress messages on stderr (repeatable)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << e.what();
    return 0;
  } catch (const CLI::ParseError& e) {
    const nlohmann::json rec = {{"error", {{"kind", "validation"}, {"exit_code", kExitValidation},
                                           {"message", e.what()}, {"field", "arguments"}}}};
    err << report::dump(rec, 0) << "\n";
    return kExitValidation;
  }
  if (app.get_subcommands().empty()) {
    out << app.help();
    return kExitValidation;
  }
  cfg.subcommand = app.get_subcommands().front()->get_name();
  return dispatch(cfg, out, err);
}

}  // namespace lowmach::cli
