// anderson-lab: command-line front end over the C API.
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "anderson_lab.h"

namespace {

void print_warning(const char* message, void*) {
  std::fprintf(stderr, "anderson-lab: warning: %s\n", message);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo laboratory for the planar Anderson Hamiltonian"};
  app.set_version_flag("--version", al_version());
  app.require_subcommand(1);

  std::string config, out_dir = ".";
  unsigned workers = 1;
  uint64_t seed = 0;
  const std::vector<std::pair<const char*, const char*>> commands = {
      {"silt-validate", "check smoothed local-time means against exact values"},
      {"trace", "estimate the mean heat trace"},
      {"mass", "estimate the mean heat content"},
      {"recover", "recover area, perimeter, kappa^2 and Minkowski dimension"},
      {"minkowski", "boundary-neighbourhood Minkowski dimension"},
  };
  std::vector<CLI::App*> subs;
  std::vector<CLI::Option*> seed_opts;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--workers", workers, "worker threads (does not change results)")
        ->check(CLI::Range(1u, 1024u))
        ->capture_default_str();
    seed_opts.push_back(sub->add_option("--seed", seed, "override the config seed"));
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  std::size_t which = 0;
  while (!subs[which]->parsed()) ++which;
  const bool has_seed = seed_opts[which]->count() > 0;

  al_set_warning_handler(&print_warning, nullptr);
  int exit_code = 1;
  size_t needed = 0;
  std::string message(4096, '\0');
  al_status st = al_run_experiment(commands[which].first, config.c_str(), out_dir.c_str(), workers,
                                   has_seed, seed, &exit_code, message.data(), message.size(),
                                   &needed);
  if (st == AL_OK && needed > message.size()) {
    message.assign(needed, '\0');
    st = al_run_experiment(commands[which].first, config.c_str(), out_dir.c_str(), workers,
                           has_seed, seed, &exit_code, message.data(), message.size(), &needed);
  }
  if (st != AL_OK) {
    std::fprintf(stderr, "anderson-lab: %s\n", al_last_error());
    return 1;
  }
  message.resize(needed ? needed - 1 : 0);
  std::fputs(message.c_str(), exit_code == 0 ? stdout : stderr);
  return exit_code;
}
