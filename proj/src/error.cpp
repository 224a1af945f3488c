#include "dca/error.hpp"

namespace dca {

const char *errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::element_not_found: return "element-not-found";
    case Errc::invalid_rank: return "invalid-rank";
    case Errc::incompatible: return "incompatible-assignments";
    case Errc::invalid_constraint: return "invalid-constraint";
    case Errc::empty_batch: return "empty-batch";
    case Errc::config: return "configuration";
    case Errc::replay_miss: return "replay-miss";
    case Errc::oracle_io: return "oracle-io";
    case Errc::invalid_temperature: return "invalid-temperature";
    case Errc::out_of_range: return "out-of-range";
    case Errc::too_large: return "too-large";
    case Errc::io: return "io";
  }
  return "unknown";
}

}  // namespace dca
