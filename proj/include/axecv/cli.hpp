#pragma once

#include <iosfwd>

namespace axecv {

/// Entry point behind the axecv binary. Returns 0 on success, 1 on
/// validation errors and 2 on numerical failures.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace axecv
