#pragma once

namespace viewshift::cli {

/// Exit codes: 0 success, 1 usage error, 2 input or validation error,
/// 3 internal error.
int run(int argc, char** argv);

}  // namespace viewshift::cli
