#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cosafed {

/// Flat model parameters. All arithmetic between vectors requires equal
/// lengths; every operation in this library keeps entries finite.
using ParamVector = std::vector<double>;

enum class ErrorCategory { config, param, data, train, ledger, io };

const char* to_string(ErrorCategory category) noexcept;

/// Single exception type; the category drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(std::string(to_string(category)) + ": " + message),
        category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

struct ModelShape {
  int n_features = 0;
  int n_classes = 0;

  std::size_t param_count() const noexcept {
    return static_cast<std::size_t>(n_features) * n_classes + n_classes;
  }
};

struct EvalResult {
  double accuracy = 0.0;  // fraction of argmax-correct predictions
  double loss = 0.0;      // mean cross-entropy, nonnegative
};

}  // namespace cosafed
