#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace comhyper {

using WordId = std::uint32_t;
inline constexpr WordId kNoWord = static_cast<WordId>(-1);

// Error taxonomy. Callers that can recover (the router, the eval harness)
// catch the specific type; everything else propagates.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Raised by pattern scorers when a word is outside V_P.
struct OopError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MetricUndefinedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingEmbeddingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoContextError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TrainingDivergedError : std::runtime_error {
  int epoch;
  TrainingDivergedError(const std::string& msg, int epoch_index)
      : std::runtime_error(msg), epoch(epoch_index) {}
};

// FNV-1a, used for config/provenance hashes in run manifests.
inline std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Fixed-width float formatting so reports are byte-stable across runs.
std::string format_real(double v);

}  // namespace comhyper
