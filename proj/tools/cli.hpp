#pragma once

#include <iosfwd>

namespace evnav {

/// Exit status: 0 success, 1 usage error, 2 runtime failure.
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace evnav
