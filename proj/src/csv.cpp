// SPDX-License-Identifier: Apache-2.0
#include "muonlab/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "muonlab/error.hpp"
#include "muonlab/lower_bounds.hpp"

namespace muonlab {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || p != end) {
    throw Error(ErrorKind::Io, "csv line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

std::size_t to_size(const std::string& s, std::size_t line) {
  std::size_t v = 0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || p != end) {
    throw Error(ErrorKind::Io, "csv line " + std::to_string(line) + ": bad integer '" + s + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error(ErrorKind::Io, "format_double: conversion failed");
  return std::string(buf, p);
}

std::string trajectory_csv(const TrajectoryResult& result) {
  std::string out = kTrajectoryHeader;
  out += '\n';
  for (const TrajectoryRecord& r : result.records) {
    out += std::to_string(r.t);
    for (double v : {r.eta, r.loss, r.spectral_error, r.grad_sigma_min}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  if (result.aborted) {
    std::string diag = result.diagnostic;
    for (char& c : diag)
      if (c == '\n' || c == '\r') c = ' ';
    out += "# aborted: " + diag + "\n";
  }
  return out;
}

std::vector<TrajectoryRecord> parse_trajectory_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kTrajectoryHeader) {
    throw Error(ErrorKind::Io, "trajectory csv: missing or wrong header");
  }
  std::vector<TrajectoryRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line);
    if (cells.size() != 5) throw Error(ErrorKind::Io, "csv line " + std::to_string(line_no) + ": expected 5 fields");
    TrajectoryRecord r;
    r.t = to_size(cells[0], line_no);
    r.eta = to_double(cells[1], line_no);
    r.loss = to_double(cells[2], line_no);
    r.spectral_error = to_double(cells[3], line_no);
    r.grad_sigma_min = to_double(cells[4], line_no);
    out.push_back(r);
  }
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "algorithm,kappa,k,replicate,epsilon,first_hit,file\n";
  for (const SummaryRow& r : rows) {
    out += r.algorithm + ',' + format_double(r.kappa) + ',' + std::to_string(r.k) + ',' +
           std::to_string(r.replicate) + ',' + format_double(r.epsilon) + ',' +
           (r.first_hit == kNeverHit ? std::string("inf") : std::to_string(r.first_hit)) + ',' + r.file + '\n';
  }
  return out;
}

std::vector<SummaryRow> parse_summary_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (line != "algorithm,kappa,k,replicate,epsilon,first_hit,file") {
    throw Error(ErrorKind::Io, "summary csv: missing or wrong header");
  }
  std::vector<SummaryRow> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 7) throw Error(ErrorKind::Io, "summary line " + std::to_string(line_no) + ": expected 7 fields");
    SummaryRow r;
    r.algorithm = c[0];
    r.kappa = to_double(c[1], line_no);
    r.k = to_size(c[2], line_no);
    r.replicate = to_size(c[3], line_no);
    r.epsilon = to_double(c[4], line_no);
    r.first_hit = c[5] == "inf" ? kNeverHit : to_size(c[5], line_no);
    r.file = c[6];
    out.push_back(r);
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  f << content;
  if (!f) throw Error(ErrorKind::Io, "write to '" + path + "' failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace muonlab
