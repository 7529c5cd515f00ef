#include <cstdlib>
#include <iostream>
#include <string>

#include "drbeta/acceptance.hpp"

// Runs every acceptance check at full replication counts and prints one
// line per check. Exit status is the number of failed checks.
int main(int argc, char** argv) {
  using namespace drbeta::acceptance;
  auto scale = Scale::full();
  if (const char* t = std::getenv("DRBETA_THREADS")) scale.threads = std::max(1, std::atoi(t));
  std::string golden = DRBETA_GOLDEN;
  if (argc > 1) golden = argv[1];
  Suite suite(scale, golden);
  int failed = 0;
  for (int id = 1; id <= Suite::kCount; ++id) {
    const auto r = suite.run(id);
    std::cout << format_line(r) << std::endl;
    if (!r.passed) ++failed;
  }
  std::cout << (Suite::kCount - failed) << "/" << Suite::kCount << " acceptance checks passed" << std::endl;
  return failed;
}
