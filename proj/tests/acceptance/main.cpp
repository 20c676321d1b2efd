// Runs every reproduction criterion and prints one PASS/FAIL line per criterion.
// An optional argument selects a single criterion by number.

#include <cstdio>
#include <cstdlib>
#include <string>

#include "omech/acceptance.hpp"

int main(int argc, char** argv) {
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  int failed = 0;
  for (const auto& c : omech::acceptance::criteria()) {
    if (only && c.id != only) continue;
    const auto r = omech::acceptance::run_criterion(c);
    std::printf("%s\n", r.line().c_str());
    if (!r.pass()) ++failed;
  }
  std::printf("%d criteria failed\n", failed);
  return failed ? 1 : 0;
}
