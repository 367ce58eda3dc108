#include <iostream>

#include <CLI11.hpp>

#include "jellium/cli.hpp"
#include "jellium/error.hpp"

namespace cli = jellium::cli;

namespace {

void report(const std::exception& e) {
  cli::Json j{{"status", "error"}, {"message", e.what()}};
  if (const auto* c = dynamic_cast<const jellium::ConfigInvalid*>(&e)) j["pointer"] = c->pointer();
  std::cerr << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wigner jellium samplers and verification harness"};
  app.set_version_flag("--version", cli::version());
  app.require_subcommand(1);

  std::string run_path;
  auto* run = app.add_subcommand("run", "run an experiment and write its artifacts");
  run->add_option("config", run_path, "experiment config (JSON)")->required();

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a config without running it");
  validate->add_option("config", validate_path, "experiment config (JSON)")->required();

  app.add_subcommand("schema", "print the config JSON schema");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      const auto result = cli::run(cli::parse_config(cli::load_json_file(run_path)));
      cli::Json j{{"status", "ok"}, {"output_dir", result.directory.string()}, {"artifacts", result.artifacts},
                  {"summary", result.summary}};
      std::cout << j.dump(2) << "\n";
    } else if (*validate) {
      std::cout << cli::validate_config(cli::load_json_file(validate_path)).dump(2) << "\n";
    } else {
      std::cout << cli::schema().dump(2) << "\n";
    }
  } catch (const std::exception& e) {
    report(e);
    return cli::exit_code(e);
  }
  return 0;
}
