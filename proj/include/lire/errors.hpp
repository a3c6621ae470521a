#pragma once

#include <stdexcept>

namespace lire {

// Error categories map to CLI exit codes: config 2, data/format 3, numeric 4.

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace lire
