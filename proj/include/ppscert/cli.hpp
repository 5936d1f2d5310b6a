#pragma once

#include <ostream>

namespace ppscert {

/// Exit codes: 0 certified / valid, 1 not certified / invalid, 2 input error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ppscert
