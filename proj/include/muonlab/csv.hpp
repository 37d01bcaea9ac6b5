// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "muonlab/optimizers.hpp"

namespace muonlab {

inline constexpr const char* kTrajectoryHeader = "t,eta,loss,spectral_error,grad_sigma_min";

// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

// Header, one row per record, LF endings. An aborted run gets a trailing
// "# aborted: <diagnostic>" line.
std::string trajectory_csv(const TrajectoryResult& result);
std::vector<TrajectoryRecord> parse_trajectory_csv(const std::string& text);

struct SummaryRow {
  std::string algorithm;
  double kappa = 1.0;
  std::size_t k = 0;
  std::size_t replicate = 0;
  double epsilon = 0.0;
  std::size_t first_hit = 0;  // kNeverHit prints as "inf"
  std::string file;
};

std::string summary_csv(const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> parse_summary_csv(const std::string& text);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace muonlab
