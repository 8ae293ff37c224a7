#include "folia/parallel.hpp"

#include <cstdlib>

namespace folia {

std::size_t resolve_workers(int requested) {
  if (requested > 0) return std::size_t(requested);
  if (const char* env = std::getenv("THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return std::size_t(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

}  // namespace folia
