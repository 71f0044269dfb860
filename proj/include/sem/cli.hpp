#pragma once

namespace sem {

// Full command-line front end.  Exit codes: 0 success with all configured
// checks passing, 1 check failure, 2 configuration error, 3 numerical error.
int cli_main(int argc, const char* const* argv);

}  // namespace sem
