#include "cmx/data.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace cmx {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  const char* s = cell.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s, &end);
  while (end && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
  if (end == s || (end && *end != '\0') || errno == ERANGE)
    throw ParseError("non-numeric cell at row " + std::to_string(row) + ", column " +
                     std::to_string(col) + ": '" + cell + "'");
  return v;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  return in;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open file for writing: " + path);
  return out;
}

void expect_kind(std::istream& in, const std::string& path, const std::string& want,
                 std::uint64_t& seed) {
  std::string kind;
  if (!(in >> kind)) throw ParseError(path + ": missing kind header");
  if (kind != want)
    throw ParseError(path + ": expected kind '" + want + "', found '" + kind + "'");
  if (!(in >> seed)) throw ParseError(path + ": missing seed header");
}

}  // namespace

Mat load_returns_csv(const std::string& path) {
  std::ifstream in = open_for_read(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": missing header row");
  const std::size_t header_cols = split_csv_line(line).size();
  if (header_cols < 2)
    throw ParseError(path + ": header must name a period column and at least one asset");

  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header_cols)
      throw ParseError(path + ": ragged row " + std::to_string(lineno) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(header_cols));
    std::vector<double> vals(header_cols - 1);
    for (std::size_t c = 1; c < header_cols; ++c)
      vals[c - 1] = parse_cell(cells[c], lineno, c + 1);
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw ParseError(path + ": no data rows");

  Mat m(static_cast<Index>(rows.size()), static_cast<Index>(header_cols - 1));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c + 1 < header_cols; ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  return m;
}

void save_mdp_instance(const std::string& path, std::uint64_t seed, const Mat& transitions,
                       const Mat& rewards) {
  if (transitions.rows() != transitions.cols() || rewards.rows() != transitions.rows() ||
      rewards.cols() != transitions.cols())
    throw ConfigError("save_mdp_instance: matrices must be square and same size");
  std::ofstream out = open_for_write(path);
  const Index s = transitions.rows();
  out << "mdp\n" << seed << "\n" << s << "\n";
  for (Index i = 0; i < s; ++i)
    for (Index j = 0; j < s; ++j) out << fmt17(transitions(i, j)) << "\n";
  for (Index i = 0; i < s; ++i)
    for (Index j = 0; j < s; ++j) out << fmt17(rewards(i, j)) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

void load_mdp_instance(const std::string& path, std::uint64_t& seed, Mat& transitions,
                       Mat& rewards) {
  std::ifstream in = open_for_read(path);
  expect_kind(in, path, "mdp", seed);
  Index s = 0;
  if (!(in >> s) || s < 2) throw ParseError(path + ": bad state count");
  transitions.resize(s, s);
  rewards.resize(s, s);
  for (Index i = 0; i < s; ++i)
    for (Index j = 0; j < s; ++j)
      if (!(in >> transitions(i, j))) throw ParseError(path + ": truncated transition block");
  for (Index i = 0; i < s; ++i)
    for (Index j = 0; j < s; ++j)
      if (!(in >> rewards(i, j))) throw ParseError(path + ": truncated reward block");
}

void save_auc_instance(const std::string& path, std::uint64_t seed, const AucDataset& data) {
  std::ofstream out = open_for_write(path);
  const Index n = data.features.rows(), d = data.features.cols();
  out << "auc\n" << seed << "\n" << n << " " << d << "\n";
  out << fmt17(data.imratio) << "\n";
  for (Index i = 0; i < n; ++i) {
    out << data.labels[i] << "\n";
    for (Index j = 0; j < d; ++j) out << fmt17(data.features(i, j)) << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

AucDataset load_auc_instance(const std::string& path, std::uint64_t& seed) {
  std::ifstream in = open_for_read(path);
  expect_kind(in, path, "auc", seed);
  Index n = 0, d = 0;
  if (!(in >> n >> d) || n < 2 || d < 1) throw ParseError(path + ": bad dimensions");
  AucDataset data;
  if (!(in >> data.imratio)) throw ParseError(path + ": missing imratio");
  data.features.resize(n, d);
  data.labels.resize(n);
  for (Index i = 0; i < n; ++i) {
    if (!(in >> data.labels[i])) throw ParseError(path + ": truncated label block");
    for (Index j = 0; j < d; ++j)
      if (!(in >> data.features(i, j))) throw ParseError(path + ": truncated feature block");
  }
  return data;
}

}  // namespace cmx
