#pragma once

#include <iosfwd>
#include <string>

#include "cpgd/solver.hpp"

namespace cpgd::io {

/// Header `cycle,elapsed_s,F,step_norm,stat_bound,alpha_max,HF_max` followed
/// by one `metric:<name>` column per logged metric (sorted by name). One row
/// per cycle, 17 significant digits.
void write_run_log_csv(std::ostream& os, const RunLog& log);

/// Reads the columns above back into a RunLog. Only the per-cycle fields are
/// restored; solver-level constants stay at their defaults.
RunLog read_run_log_csv(std::istream& is, const std::string& source = "<stream>");

}  // namespace cpgd::io
