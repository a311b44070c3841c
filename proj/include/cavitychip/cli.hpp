#pragma once

namespace cavitychip::cli {

// exit codes: 0 ok, 2 bad input, 3 insufficient data, 4 numerical failure
inline constexpr int exit_ok = 0;
inline constexpr int exit_bad_input = 2;
inline constexpr int exit_insufficient_data = 3;
inline constexpr int exit_numerical = 4;

int run(int argc, const char* const* argv);

}
