#include "hpss/run.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical-matrix power-series solver for 2D TM scattering"};
  app.require_subcommand(1);

  struct Command {
    CLI::App* app;
    std::string config_file;
    std::map<std::string, std::string> values;
  };
  std::vector<Command> cmds;
  cmds.reserve(4);
  const std::vector<std::pair<std::string, std::string>> names{
      {"solve", "mesh, assemble and solve with one solver"},
      {"compare", "run several solvers (and the series oracle when one exists) and tabulate RMS"},
      {"bench", "scaling table over strip sizes with fitted log-log slopes"},
      {"oracle-check", "self-checks against analytic series and the dense oracle"},
  };
  for (const auto& [name, help] : names) {
    Command c;
    c.app = app.add_subcommand(name, help);
    cmds.push_back(std::move(c));
    Command& cmd = cmds.back();
    cmd.app->add_option("--config", cmd.config_file, "key=value file; flags override it")
        ->check(CLI::ExistingFile);
    for (const std::string& key : hpss::config_keys()) {
      std::string flag = key;
      for (char& ch : flag)
        if (ch == '_') ch = '-';
      cmd.app->add_option("--" + flag, cmd.values[key], hpss::config_key_help(key));
    }
  }

  CLI11_PARSE(app, argc, argv);

  for (Command& cmd : cmds) {
    if (!cmd.app->parsed()) continue;
    try {
      std::vector<std::pair<std::string, std::string>> overrides;
      for (const std::string& key : hpss::config_keys()) {
        std::string flag = key;
        for (char& ch : flag)
          if (ch == '_') ch = '-';
        if (cmd.app->count("--" + flag)) overrides.emplace_back(key, cmd.values[key]);
      }
      std::ifstream file;
      std::istringstream empty;
      std::istream* in = &empty;
      if (!cmd.config_file.empty()) {
        file.open(cmd.config_file);
        in = &file;
      }
      const hpss::RunConfig cfg = hpss::parse_config(*in, overrides);
      return hpss::run_command(cmd.app->get_name(), cfg, std::cout);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  return 2;
}
