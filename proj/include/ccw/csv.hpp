// Flat-file plumbing: shortest round-trip double formatting, subject dataset
// CSV read/write, and survival-curve export.
#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccw/core.hpp"
#include "ccw/km.hpp"

namespace ccw {

// Shortest decimal string that parses back to the same double.
inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::optional<double> parse_opt(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  return std::strtod(cell.c_str(), nullptr);
}

inline std::string opt_str(const std::optional<double>& v) {
  return v.has_value() ? fmt_double(*v) : std::string();
}

}  // namespace detail

// Observed-data dataset file. Baseline columns:
//   id,X1,X2,X3,A_0..A_K,T_tilde,event
// Time-varying columns:
//   id,X1,X2,X3_0..X3_K,X4_0..X4_K,A_0..A_K,T_tilde,event
// Empty cells are unattended visits.
inline void write_subjects_csv(std::ostream& os, const std::vector<SubjectRecord>& subjects,
                               int K) {
  const bool tv = !subjects.empty() && subjects.front().has_timevarying();
  os << "id,X1,X2";
  if (tv) {
    for (int k = 0; k <= K; ++k) os << ",X3_" << k;
    for (int k = 0; k <= K; ++k) os << ",X4_" << k;
  } else {
    os << ",X3";
  }
  for (int k = 0; k <= K; ++k) os << ",A_" << k;
  os << ",T_tilde,event\n";
  for (const auto& s : subjects) {
    os << s.id << ',' << fmt_double(s.X1) << ',' << fmt_double(s.X2);
    if (tv) {
      for (int k = 0; k <= K; ++k) os << ',' << detail::opt_str(s.X3k[static_cast<std::size_t>(k)]);
      for (int k = 0; k <= K; ++k) os << ',' << detail::opt_str(s.X4k[static_cast<std::size_t>(k)]);
    } else {
      os << ',' << fmt_double(s.X3);
    }
    for (int k = 0; k <= K; ++k) os << ',' << detail::opt_str(s.A[static_cast<std::size_t>(k)]);
    os << ',' << fmt_double(s.T_tilde) << ',' << s.event << '\n';
  }
}

inline void write_subjects_csv(const std::string& path, const std::vector<SubjectRecord>& subjects,
                               int K) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_subjects_csv(os, subjects, K);
}

inline std::vector<SubjectRecord> read_subjects_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty dataset file");
  const auto header = detail::split_csv_line(line);
  std::vector<int> a_cols, x3_cols, x4_cols;
  int id_col = -1, x1_col = -1, x2_col = -1, x3_col = -1, t_col = -1, e_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& h = header[c];
    const int ci = static_cast<int>(c);
    if (h == "id") id_col = ci;
    else if (h == "X1") x1_col = ci;
    else if (h == "X2") x2_col = ci;
    else if (h == "X3") x3_col = ci;
    else if (h == "T_tilde") t_col = ci;
    else if (h == "event") e_col = ci;
    else if (h.rfind("A_", 0) == 0) a_cols.push_back(ci);
    else if (h.rfind("X3_", 0) == 0) x3_cols.push_back(ci);
    else if (h.rfind("X4_", 0) == 0) x4_cols.push_back(ci);
    else throw std::runtime_error("unrecognized dataset column: " + h);
  }
  if (id_col < 0 || x1_col < 0 || x2_col < 0 || t_col < 0 || e_col < 0 || a_cols.empty())
    throw std::runtime_error("dataset file is missing required columns");
  if (x3_col < 0 && x3_cols.empty())
    throw std::runtime_error("dataset file has neither X3 nor X3_k columns");

  std::vector<SubjectRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error("dataset row has wrong number of cells");
    SubjectRecord s;
    s.id = std::strtoll(cells[static_cast<std::size_t>(id_col)].c_str(), nullptr, 10);
    s.X1 = std::strtod(cells[static_cast<std::size_t>(x1_col)].c_str(), nullptr);
    s.X2 = std::strtod(cells[static_cast<std::size_t>(x2_col)].c_str(), nullptr);
    if (x3_col >= 0) s.X3 = std::strtod(cells[static_cast<std::size_t>(x3_col)].c_str(), nullptr);
    for (int c : x3_cols) s.X3k.push_back(detail::parse_opt(cells[static_cast<std::size_t>(c)]));
    for (int c : x4_cols) s.X4k.push_back(detail::parse_opt(cells[static_cast<std::size_t>(c)]));
    for (int c : a_cols) s.A.push_back(detail::parse_opt(cells[static_cast<std::size_t>(c)]));
    s.T_tilde = std::strtod(cells[static_cast<std::size_t>(t_col)].c_str(), nullptr);
    s.event = std::atoi(cells[static_cast<std::size_t>(e_col)].c_str());
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<SubjectRecord> read_subjects_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open dataset file: " + path);
  return read_subjects_csv(is);
}

inline void write_survival_csv(const std::string& path, const StepSurvival& s) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "time,survival\n";
  os << "0,1\n";
  for (std::size_t k = 0; k < s.times.size(); ++k)
    os << fmt_double(s.times[k]) << ',' << fmt_double(s.surv[k]) << '\n';
}

}  // namespace ccw
