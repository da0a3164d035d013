// Acceptance suite: one pass/fail line per criterion, exit 0 when everything
// holds and 2 otherwise. Thread count from --threads or SINGULAB_THREADS.

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <thread>

#include "singulab/verify.hpp"

int main(int argc, char** argv) {
  int threads = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc) threads = std::atoi(argv[i + 1]);
  }
  if (threads <= 0) {
    if (const char* env = std::getenv("SINGULAB_THREADS")) threads = std::atoi(env);
  }
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads <= 0) threads = 2;

  std::cout << "running acceptance suite on " << threads << " threads\n";
  const auto results = singulab::run_acceptance(threads, &std::cout);
  int passed = 0;
  for (const auto& r : results) passed += r.pass ? 1 : 0;
  std::cout << passed << "/" << results.size() << " criteria passed\n";
  return singulab::all_passed(results) ? 0 : 2;
}
