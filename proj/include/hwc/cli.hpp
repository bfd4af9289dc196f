#pragma once

#include <string>
#include <vector>

namespace hwc::cli {

// The whole command surface; returns the process exit code. Exposed so
// tests can drive the real CLI in-process.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace hwc::cli
