#pragma once

#include <stdexcept>
#include <string>

namespace dca {

enum class Errc {
  invalid_argument = 1,
  element_not_found,
  invalid_rank,
  incompatible,
  invalid_constraint,
  empty_batch,
  config,
  replay_miss,
  oracle_io,
  invalid_temperature,
  out_of_range,
  too_large,
  io,
};

const char *errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string &what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace dca
