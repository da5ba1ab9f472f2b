#pragma once

#include <stdexcept>
#include <string>

namespace clickcount {

inline constexpr const char* kVersion = "0.1.0";

/// Raised when an alternating-sum evaluation produced a result that cannot
/// be trusted (raw value below -1e-9) and no stable route was available.
struct StabilityError : std::runtime_error {
  explicit StabilityError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a computation would exceed its work budget or overflow the
/// representable range of the log-domain intermediates.
struct ResourceError : std::runtime_error {
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

/// Counters for the negative-entry clamping policy. Entries in [-1e-12, 0)
/// are clamped to zero and counted here; anything below -1e-9 is a
/// StabilityError instead.
struct StabilityDiagnostics {
  unsigned long long clamped = 0;
  double worst_negative = 0.0;  // most negative raw value seen, <= 0
  unsigned long long fallback_evals = 0;

  void merge(const StabilityDiagnostics& o) {
    clamped += o.clamped;
    fallback_evals += o.fallback_evals;
    if (o.worst_negative < worst_negative) worst_negative = o.worst_negative;
  }
};

}  // namespace clickcount
