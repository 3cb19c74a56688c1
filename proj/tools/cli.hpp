#pragma once

namespace shapereg::cli {

// Full command-line entry point. Returns the process exit code:
// 0 success, 1 usage or input error, 2 numerical failure.
int run(int argc, const char* const* argv);

}  // namespace shapereg::cli
