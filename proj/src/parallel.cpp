#include "idpoint/parallel.hpp"

#include <cstdlib>
#include <string>

namespace idpoint {

unsigned default_thread_count() {
  if (const char* env = std::getenv("IDPOINT_THREADS")) {
    try {
      const long value = std::stol(env);
      if (value > 0) return static_cast<unsigned>(value);
    } catch (...) {
      // fall through to hardware concurrency
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace idpoint
