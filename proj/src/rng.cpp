#include "folia/rng.hpp"

// Rng is header-only; this translation unit anchors the library target.
namespace folia {
namespace {
[[maybe_unused]] Rng anchor(0);
}
}  // namespace folia
