#pragma once

#include <stdexcept>

namespace mqc {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration or arguments. CLI exit code 2.
struct config_error : error {
  using error::error;
};

// Filesystem or serialization failure. CLI exit code 3.
struct io_error : error {
  using error::error;
};

// Fatal numerical condition, e.g. a state whose norm collapsed. CLI exit code 4.
struct numerical_error : error {
  using error::error;
};

}  // namespace mqc
