// transduce - command-line front end: one CSV per subcommand.
//
// exit codes: 0 ok, 2 bad config or arguments, 3 numerical failure

#include "transduce/commands.hpp"
#include "transduce/config.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <string_view>

namespace {

using Command = std::function<transduce::ResultTable(const transduce::RunConfig&, int)>;

struct Args {
  std::string config;
  std::string out;
  int threads = transduce::default_thread_count();
  bool seedless = false;
};

void add_common(CLI::App* sub, Args& args) {
  sub->add_option("--config", args.config, "JSON run configuration (defaults when omitted)");
  sub->add_option("--out", args.out, "output CSV path (default <output.directory>/<command>.csv)");
  sub->add_option("--threads", args.threads, "worker threads for sweep points")->check(CLI::PositiveNumber);
  // Nothing is random; the flag exists so scripts can state it. A value is an error.
  sub->add_flag("--seedless", args.seedless, "no-op: the simulator uses no RNG")->disable_flag_override();
}

int run(const std::string& name, const Command& cmd, const Args& args) {
  const transduce::RunConfig rc =
      args.config.empty() ? transduce::default_run_config() : transduce::load_run_config(args.config);
  const transduce::ResultTable table = cmd(rc, args.threads);
  std::string path = args.out;
  if (path.empty()) {
    std::filesystem::create_directories(rc.output_directory);
    path = (std::filesystem::path(rc.output_directory) / (name + ".csv")).string();
  }
  if (path == "-")
    table.write(std::cout);
  else
    table.save(path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lambda-system frequency transduction simulator"};
  app.set_version_flag("--version", std::string(TRANSDUCE_VERSION));
  app.require_subcommand(1);

  Args args;
  struct Entry {
    const char* name;
    const char* help;
    Command cmd;
  };
  const Entry commands[] = {
      {"pump-sweep", "pumping efficiency vs pump power, stretched and unstretched", transduce::cmd_pump_sweep},
      {"efficiency-curve", "absorbed, detected and internal efficiency vs input power",
       transduce::cmd_efficiency_curve},
      {"spectrum", "detected photons vs input detuning", transduce::cmd_spectrum},
      {"bandwidth", "fitted Lorentzian FWHM vs input power", transduce::cmd_bandwidth},
      {"cavity", "cavity-assisted absorption and collection scenarios", transduce::cmd_cavity},
      {"populations", "level populations during optical pumping", transduce::cmd_populations},
  };
  std::string selected;
  Command selected_cmd;
  for (const auto& [name, help, cmd] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, args);
    sub->callback([&, name = std::string(name), cmd = cmd] {
      selected = name;
      selected_cmd = cmd;
    });
  }

  std::string schema_out;
  CLI::App* schema = app.add_subcommand("schema", "print the config JSON Schema");
  schema->add_option("--out", schema_out, "write to a file instead of stdout");
  std::string defaults_out;
  CLI::App* defaults = app.add_subcommand("defaults", "print the default config");
  defaults->add_option("--out", defaults_out, "write to a file instead of stdout");

  // CLI11 accepts "--flag=true"; any value on --seedless is an error here
  for (int i = 1; i < argc; ++i) {
    if (std::string_view(argv[i]).starts_with("--seedless=")) {
      std::cerr << "--seedless takes no value\n";
      return 2;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto emit = [](const transduce::json& doc, const std::string& path) {
    const std::string text = doc.dump(2) + "\n";
    if (path.empty()) {
      std::cout << text;
      return;
    }
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f || std::fwrite(text.data(), 1, text.size(), f) != text.size()) throw std::runtime_error("cannot write " + path);
    std::fclose(f);
  };

  try {
    if (schema->parsed()) {
      emit(transduce::config_json_schema(), schema_out);
      return 0;
    }
    if (defaults->parsed()) {
      emit(transduce::default_config_json(), defaults_out);
      return 0;
    }
    return run(selected, selected_cmd, args);
  } catch (const transduce::ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const transduce::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
