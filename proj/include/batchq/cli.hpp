#pragma once

#include <ostream>
#include <string>

#include "batchq/error.hpp"

namespace batchq {

/// Process exit statuses of the batchq tool.
namespace exit_status {
inline constexpr int ok = 0;
inline constexpr int usage = 2;      // parse, I/O, kind mismatch, invalid model
inline constexpr int unstable = 3;   // rho >= 1
inline constexpr int numerical = 4;  // root count, repeated root, singular system, degree
inline constexpr int compare_failed = 5;
}  // namespace exit_status

int exit_status_for(ErrorCode code) noexcept;

/// Fixed-point text of x cut (not rounded) to `decimals` places; values in
/// (-1e-12, 0) print as zero.
std::string truncate_fixed(double x, int decimals);

/// Default TVD threshold for a run of `slots` slots: the 10^7-slot threshold
/// widened by the square root of the sample-size ratio.
double scaled_tvd_threshold(double slots);

/// Entry point of the batchq tool. Data goes to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace batchq
