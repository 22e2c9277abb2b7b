#include "stablesde/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "stablesde/errors.hpp"

namespace stablesde {

std::string format_double(double x) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) throw IoError("cannot format number");
  return std::string(buf.data(), ptr);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.close();
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  for (auto& s : cells) {
    const auto a = s.find_first_not_of(" \t");
    const auto b = s.find_last_not_of(" \t");
    s = a == std::string::npos ? "" : s.substr(a, b - a + 1);
  }
  return cells;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* b = s.data() + (s[0] == '+' ? 1 : 0);
  auto [p, ec] = std::from_chars(b, s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

bool is_missing(const std::string& s) { return s.empty() || s == "NA"; }

}  // namespace

LoadedSeries load_csv(const std::string& path, const std::string& column, double T) {
  std::istringstream in(read_text(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      rows.push_back({""});
      continue;
    }
    rows.push_back(split_csv_line(line));
  }
  while (!rows.empty() && rows.back().size() == 1 && rows.back()[0].empty()) rows.pop_back();
  if (rows.empty()) throw IoError("'" + path + "' is empty");

  bool header = false;
  for (const auto& cell : rows[0]) {
    double x;
    if (!is_missing(cell) && !parse_number(cell, x)) header = true;
  }
  std::size_t col = rows[0].size() - 1;
  if (header) {
    if (column.empty()) {
      col = rows[0].size() - 1;
    } else {
      bool found = false;
      for (std::size_t i = 0; i < rows[0].size(); ++i)
        if (rows[0][i] == column) {
          col = i;
          found = true;
        }
      if (!found) throw IoError("column '" + column + "' not found in '" + path + "'");
    }
  } else if (!column.empty()) {
    std::size_t idx = 0;
    auto [p, ec] = std::from_chars(column.data(), column.data() + column.size(), idx);
    if (ec != std::errc() || p != column.data() + column.size())
      throw IoError("'" + path + "' has no header, so column must be a 0-based index");
    col = idx;
  }

  LoadedSeries out;
  std::vector<double> values;
  for (std::size_t r = header ? 1 : 0; r < rows.size(); ++r) {
    const std::size_t data_row = header ? r : r + 1;
    const std::string cell = col < rows[r].size() ? rows[r][col] : "";
    if (is_missing(cell)) {
      out.dropped_rows.push_back(data_row);
      continue;
    }
    double x;
    if (!parse_number(cell, x) || !std::isfinite(x))
      throw IoError("'" + path + "': cannot parse '" + cell + "' at row " + std::to_string(data_row) + ", column " +
                    std::to_string(col));
    values.push_back(x);
  }
  if (values.size() < 2)
    throw IoError("'" + path + "' has fewer than 2 usable observations after dropping missing rows");
  out.obs = ObservationSet::from_values(std::move(values), T);
  return out;
}

void write_observations(const ObservationSet& obs, const std::string& path) {
  std::string s = "index,value\n";
  for (std::size_t i = 0; i < obs.values.size(); ++i) s += std::to_string(i) + "," + format_double(obs.values[i]) + "\n";
  write_text(path, s);
}

void write_trace(const ChainTrace& trace, const std::string& path) {
  std::string s = "iter";
  for (const auto& n : trace.names) s += "," + n;
  s += ",accepted\n";
  for (Eigen::Index m = 0; m < trace.thetas.rows(); ++m) {
    s += std::to_string(m);
    for (Eigen::Index j = 0; j < trace.thetas.cols(); ++j) s += "," + format_double(trace.thetas(m, j));
    s += m == 0 ? ",0\n" : (trace.accept_flags[m - 1] ? ",1\n" : ",0\n");
  }
  write_text(path, s);
}

TraceTable read_trace(const std::string& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line)) throw IoError("'" + path + "' is empty");
  const auto head = split_csv_line(line);
  if (head.size() < 2 || head.front() != "iter" || head.back() != "accepted")
    throw IoError("'" + path + "' does not have an iter,...,accepted header");
  TraceTable t;
  t.names.assign(head.begin() + 1, head.end() - 1);
  std::vector<std::vector<double>> rows;
  std::size_t r = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++r;
    const auto cells = split_csv_line(line);
    if (cells.size() != head.size()) throw IoError("'" + path + "': wrong field count at row " + std::to_string(r));
    std::vector<double> row;
    for (std::size_t j = 1; j + 1 < cells.size(); ++j) {
      double x;
      if (!parse_number(cells[j], x)) throw IoError("'" + path + "': bad number at row " + std::to_string(r));
      row.push_back(x);
    }
    t.accepted.push_back(cells.back() == "1");
    rows.push_back(std::move(row));
  }
  t.thetas.resize(rows.size(), t.names.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < t.names.size(); ++j) t.thetas(i, j) = rows[i][j];
  return t;
}

}  // namespace stablesde
