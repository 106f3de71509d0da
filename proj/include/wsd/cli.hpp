#pragma once

namespace wsd::cli {

// Exit codes: 0 success, 1 validation/data error, 2 I/O error.
int run(int argc, const char* const* argv);

}  // namespace wsd::cli
