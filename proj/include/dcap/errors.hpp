#pragma once

#include <stdexcept>
#include <string>

namespace dcap {

struct BlowUpError : std::runtime_error {
  explicit BlowUpError(double time)
      : std::runtime_error("solution norm exceeded the blow-up guard at t = " +
                           std::to_string(time)),
        t(time) {}
  double t;
};

}  // namespace dcap
