// Runs every acceptance criterion and prints one PASS/FAIL line per
// criterion. Exit status 0 iff all pass. Optional arguments select
// criterion numbers.

#include "morseflow/acceptance.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>

int main(int argc, char** argv) {
  morseflow::acceptance::Options opts;
  for (int i = 1; i < argc; ++i) opts.only.push_back(std::atoi(argv[i]));
  opts.on_result = [](const morseflow::acceptance::CriterionResult& r) {
    std::printf("%s\n", morseflow::acceptance::format(r).c_str());
    std::fflush(stdout);
  };
  const auto results = morseflow::acceptance::run(opts);
  int failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  std::printf("%zu criteria, %d failed\n", results.size(), failed);
  return failed == 0 && !results.empty() ? 0 : 1;
}
