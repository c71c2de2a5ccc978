#pragma once

// CSV formats. Period decimal separator, LF line endings, header row first.
//
//   series   i,value
//   chart    idx,point,center,ucl,lcl,signal
//   trace    i,x,u,y,z,clamped
//   summary  rule,n_reps,horizon,mean_z,var_z,abs_offset
//   per-step i,mean_z
//   surface  lambda1,lambda2,objective

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include "blendloop/charts.hpp"
#include "blendloop/simulator.hpp"
#include "blendloop/tuner.hpp"

namespace blendloop {

// Malformed CSV input; line is 1-based (the header is line 1).
struct CsvError : InvalidInput {
    CsvError(std::size_t line, const std::string& what);
    std::size_t line;
};

// Shortest representation that round-trips to the same double.
std::string format_number(double value);

// Reads the `i,value` format. i must be integral and strictly increasing.
Series<double> read_series_csv(std::istream& in);
Series<double> read_series_csv(const std::filesystem::path& path);

// Rows are numbered first_index, first_index + 1, ...
void write_series_csv(std::ostream& out, const Series<double>& series, std::int64_t first_index = 1);
void write_chart_csv(std::ostream& out, const ControlChart<double>& chart);
void write_trace_csv(std::ostream& out, const SimTrace& trace);
void write_summary_header(std::ostream& out);
void write_summary_row(std::ostream& out, const std::string& rule, const ReplicationSummary& summary);
void write_per_step_csv(std::ostream& out, const Series<double>& per_step_mean_z);
void write_surface_csv(std::ostream& out, std::span<const SurfacePoint> surface);

} // namespace blendloop
