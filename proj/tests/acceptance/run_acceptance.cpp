// Runs every acceptance criterion and prints one line per criterion.
#include <cstdio>
#include <cstdlib>
#include <string>

#include "stabcert/acceptance.hpp"

int main(int argc, char** argv) {
  stabcert::AcceptanceOptions opts;
  if (const char* t = std::getenv("STABCERT_THREADS")) opts.threads = static_cast<unsigned>(std::max(1, std::atoi(t)));
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--no-runtime") opts.enforce_runtime = false;
  }
  bool all = true;
  for (const auto& r : stabcert::run_acceptance(opts)) {
    std::printf("%s\n", stabcert::format_result(r).c_str());
    std::fflush(stdout);
    all = all && r.passed;
  }
  std::printf("%s\n", all ? "all acceptance criteria passed" : "acceptance criteria FAILED");
  return all ? 0 : 1;
}
