// Command-line front end: parses and runs scripts in the space-definition
// DSL (see docs/dsl.md) and emits one JSON record per command.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "diffspace/dsl.hpp"
#include "diffspace/runner.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differential-space workbench: spaces, elements, spectra, probes"};
  app.require_subcommand(1);

  std::string run_file;
  std::uint64_t seed = 0;
  std::string json_out;
  bool hex_floats = false;
  auto* run = app.add_subcommand("run", "execute a script and emit JSON records");
  run->add_option("file", run_file, "script file")->required();
  run->add_option("--seed", seed, "sampling seed (default 0)");
  run->add_option("--json", json_out, "write the records here instead of stdout");
  run->add_flag("--hex-floats", hex_floats, "print doubles as quoted hex-float literals");

  std::string check_file;
  auto* check = app.add_subcommand("check", "parse a script and report diagnostics only");
  check->add_option("file", check_file, "script file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) {
      diffspace::dsl::Program program =
          diffspace::dsl::parse_program(read_file(check_file));
      std::cout << "ok: " << program.statements.size() << " statement(s)\n";
      return 0;
    }
    diffspace::dsl::Program program = diffspace::dsl::parse_program(read_file(run_file));
    diffspace::dsl::RunResult result = diffspace::dsl::Runner(seed).run(program);
    std::string rendered = result.render(hex_floats);
    if (json_out.empty()) {
      std::cout << rendered;
    } else {
      std::ofstream out(json_out, std::ios::binary);
      if (!out) {
        std::cerr << "cannot write '" << json_out << "'\n";
        return 2;
      }
      out << rendered;
    }
    return result.ok ? 0 : 1;
  } catch (const diffspace::dsl::parse_error& e) {
    std::cerr << (check->parsed() ? check_file : run_file) << ":" << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
