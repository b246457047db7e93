#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gps/fluid.hpp"
#include "gps/measure.hpp"
#include "gps/simulator.hpp"
#include "gps/test_functions.hpp"

namespace gps::io {

// Shortest decimal string that round-trips the double exactly; "inf" for infinity.
std::string format_number(double v);

// Each line is written as "# <line>" before the column header.
using CommentHeader = std::vector<std::string>;

void write_measure_csv(std::ostream& os, const AtomicMeasure& m, const CommentHeader& header = {});
void write_jobs_csv(std::ostream& os, const Trace& trace, const CommentHeader& header = {});
void write_batches_csv(std::ostream& os, const Trace& trace, const CommentHeader& header = {});
void write_snapshots_csv(std::ostream& os, const std::vector<SimState>& states, const CommentHeader& header = {});
// Extra columns "sigma:<tag>" and "mu:<tag>" for each probe in `probes`.
void write_fluid_csv(std::ostream& os, const FluidParams& p, const std::vector<double>& grid,
                     const std::vector<TestFunction>& probes = {}, const CommentHeader& header = {});

// Parsed jobs.csv row; departure is absent for jobs still behind the gate.
struct JobRow {
  std::size_t id = 0;
  double arrival = 0.0;
  double service = 0.0;
  std::optional<std::size_t> batch;
  std::optional<double> departure;
};

// Reads a jobs.csv written by write_jobs_csv; '#' lines are skipped.
// Throws std::runtime_error on malformed input.
std::vector<JobRow> read_jobs_csv(std::istream& is);

}  // namespace gps::io
