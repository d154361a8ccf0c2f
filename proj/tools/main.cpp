#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "app.hpp"

namespace {

using htqft::app::Command;
using htqft::app::KeyKind;

struct Subcommand {
  Command command;
  CLI::App* app = nullptr;
  std::string config_path;
  std::map<std::string, std::vector<std::string>> words;
  std::map<std::string, CLI::Option*> options;
};

void add_config_flags(Subcommand& s) {
  s.app->add_option("--config", s.config_path, "JSON config file; flags override its keys");
  for (const auto& [key, kind] : htqft::app::config_keys()) {
    auto& w = s.words[key];
    CLI::Option* opt = s.app->add_option("--" + key, w);
    switch (kind) {
      case KeyKind::real_list:
      case KeyKind::integer_list: opt->expected(1, CLI::detail::expected_max_vector_size)->delimiter(','); break;
      case KeyKind::boolean: opt->expected(0, 1); break;
      default: opt->expected(1)->multi_option_policy(CLI::MultiOptionPolicy::TakeLast); break;
    }
    s.options[key] = opt;
  }
}

htqft::app::RunConfig resolve(const Subcommand& s) {
  std::vector<std::pair<std::string, htqft::app::json>> flags;
  for (const auto& [key, opt] : s.options) {
    if (opt->count() == 0) continue;
    const auto& w = s.words.at(key);
    if (htqft::app::config_keys().at(key) == KeyKind::boolean && w.empty())
      flags.emplace_back(key, true);
    else
      flags.emplace_back(key, htqft::app::flag_value(key, w));
  }
  return htqft::app::resolve_config(s.config_path, flags);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hamiltonian truncation of the massive Schwinger model: spectra, quenches, Pauli terms, circuits"};
  app.require_subcommand(1);

  const std::vector<std::pair<Command, std::string>> commands{
      {Command::basis, "Write the truncated Fock basis"},
      {Command::spectrum, "Vector mass over a grid of m_over_g and n_q"},
      {Command::quench, "Vacuum persistence |G(t)|^2 after switching on the interaction"},
      {Command::pauli, "Pauli-word decomposition of the truncated Hamiltonian"},
      {Command::circuit, "OpenQASM 2.0 circuit for the Trotter step"},
      {Command::matrix, "Dump the assembled Hamiltonian matrix"},
  };
  std::vector<Subcommand> subs;
  subs.reserve(commands.size());
  for (const auto& [cmd, help] : commands) {
    Subcommand s;
    s.command = cmd;
    s.app = app.add_subcommand(htqft::app::to_string(cmd), help);
    subs.push_back(std::move(s));
  }
  for (auto& s : subs) add_config_flags(s);

  CLI11_PARSE(app, argc, argv);

  for (const auto& s : subs) {
    if (!s.app->parsed()) continue;
    try {
      return htqft::app::run_command(s.command, resolve(s), std::cout, std::cerr);
    } catch (const htqft::app::ConfigError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return 1;
}
