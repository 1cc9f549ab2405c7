#include "evi/core.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>

namespace evi {

int thread_count() {
  static const int count = [] {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("PARVI_THREADS")) {
      try {
        const int requested = std::stoi(env);
        if (requested >= 1) return requested;
      } catch (const std::exception&) {
      }
    }
    return static_cast<int>(hw);
  }();
  return count;
}

}  // namespace evi
