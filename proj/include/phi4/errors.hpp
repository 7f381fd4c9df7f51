#pragma once

#include <stdexcept>
#include <string>

namespace phi4 {

// Bad arguments, malformed files, violated preconditions. CLI exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite gradients or chain states during training. CLI exit code 3.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int epoch, const std::string& what)
      : std::runtime_error(what), epoch_(epoch) {}

  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace phi4
