#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "stablesde/mcmc.hpp"
#include "stablesde/simulate.hpp"

namespace stablesde {

/// Shortest decimal form that reads back to the same double.
std::string format_double(double x);

struct LoadedSeries {
  ObservationSet obs;
  std::vector<std::size_t> dropped_rows;  ///< 1-based data rows (header excluded)
};

/// Reads one column of a CSV file. Empty cells and "NA" are missing; missing
/// rows are dropped and the remainder is treated as contiguous on h = T / N.
/// A first row that does not parse as numbers is taken as a header; without
/// one, `column` must be empty (last column) or a 0-based index.
LoadedSeries load_csv(const std::string& path, const std::string& column, double T);

/// Writes "index,value" rows.
void write_observations(const ObservationSet& obs, const std::string& path);

/// Header "iter,<names>,accepted"; one row per iteration. Row 0 is the
/// initial state and is written with accepted = 0.
void write_trace(const ChainTrace& trace, const std::string& path);

struct TraceTable {
  std::vector<std::string> names;
  Eigen::MatrixXd thetas;
  std::vector<bool> accepted;  ///< one per row
};

TraceTable read_trace(const std::string& path);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace stablesde
