#pragma once

#include <string>
#include <vector>

namespace equimorse::cli {

struct Outcome {
  int exit_code = 0;
  std::string out, err;
};

// argv without the program name. Exit codes: 0 ok, 1 catalog failures,
// 2 validation, 3 numerical, 64 usage.
Outcome run(const std::vector<std::string>& args);

}  // namespace equimorse::cli
