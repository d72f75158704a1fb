#include "cosafed/types.hpp"

namespace cosafed {

const char* to_string(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::param: return "param";
    case ErrorCategory::data: return "data";
    case ErrorCategory::train: return "train";
    case ErrorCategory::ledger: return "ledger";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

}  // namespace cosafed
