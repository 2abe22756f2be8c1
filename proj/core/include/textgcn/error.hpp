#pragma once

#include <stdexcept>
#include <string>

namespace textgcn {

// Raised for bad user input (missing files, malformed corpora, inconsistent
// flags). The CLI maps this to exit code 2; anything else exits 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace textgcn
