#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "diffspace/dsl.hpp"
#include "diffspace/report.hpp"
#include "diffspace/spectrum.hpp"
#include "diffspace/structure.hpp"

namespace diffspace::dsl {

/// Result of executing a program: one report record per command, plus one
/// error record for each failed statement, and the overall success flag
/// (true iff nothing errored).
struct RunResult {
  std::vector<Json> records;
  bool ok = true;
  /// NDJSON rendering, one record per line.
  std::string render(bool hex_floats = false) const;
};

/// Executes parsed programs against the library. Definition statements
/// build named spaces and assignments (the most recent space is active;
/// `use` switches, `in <name>` overrides per command); command statements
/// append one report record each. A failing command is recorded and the run
/// continues; a failing definition stops the run, since every later
/// statement could depend on the missing name.
///
/// All sampling flows from the one seed, so a fixed (program, seed) pair
/// renders byte-identical output.
class Runner {
 public:
  explicit Runner(std::uint64_t seed = 0) : seed_(seed) {}

  RunResult run(const Program& p);

 private:
  DifferentialSpace& working(const CommandStmt& c);
  spectrum::GeneratorAssignment target_assignment(const CommandStmt& c) const;
  void run_command(const CommandStmt& c, Json& record);

  std::uint64_t seed_ = 0;
  std::map<std::string, DifferentialSpace> spaces_;
  std::map<std::string, spectrum::GeneratorAssignment> assigns_;
  std::string active_;
  int tilde_count_ = 0;
};

}  // namespace diffspace::dsl
