#pragma once

#include <iosfwd>

namespace ssllab {

// Exit codes: 0 success, 2 usage or configuration error, 3 runtime or data error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace ssllab
