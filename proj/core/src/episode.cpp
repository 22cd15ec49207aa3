#include "mgp/episode.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace mgp {

void Episode::validate() const {
  const Eigen::Index N = times.size();
  if (N < 1) throw empty_data("episode '" + id + "': no rows");
  if (obs.rows() != N || mask.rows() != N || mask.cols() != obs.cols())
    throw dimension_mismatch("episode '" + id + "': obs/mask/times shapes disagree");
  if (static_cast<Eigen::Index>(channels.size()) != obs.cols())
    throw dimension_mismatch("episode '" + id + "': channel names do not match obs columns");
  for (Eigen::Index i = 0; i + 1 < N; ++i) {
    if (times(i) == times(i + 1))
      throw duplicate_timestamp("episode '" + id + "': duplicate time " + std::to_string(times(i)));
    if (times(i) > times(i + 1))
      throw data_error("episode '" + id + "': times not sorted");
  }
  for (Eigen::Index i = 0; i < N; ++i)
    if (!mask.row(i).any())
      throw data_error("episode '" + id + "': row " + std::to_string(i) + " has no observed values");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trimmed(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& cell, int row, int col) {
  double v = 0.0;
  const char* b = cell.data();
  const char* e = b + cell.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e)
    throw parse_error("bad number '" + cell + "' at row " + std::to_string(row) +
                      ", column " + std::to_string(col + 1));
  return v;
}

}  // namespace

Episode ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open '" + path + "'");

  std::string line;
  int lineno = 0;
  // header (first non-comment line)
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty()) throw empty_data("'" + path + "': empty file");
  if (header.size() < 3 || trimmed(header[0]) != "episode_id" || trimmed(header[1]) != "time")
    throw parse_error("'" + path + "': header must be episode_id,time,<channels...>");

  const int m = static_cast<int>(header.size()) - 2;
  std::vector<std::string> channels(header.begin() + 2, header.end());
  for (auto& c : channels) c = trimmed(c);

  struct Row {
    double t;
    std::vector<double> vals;
    std::vector<bool> present;
  };
  std::vector<Row> rows;
  std::string id;

  while (std::getline(in, line)) {
    ++lineno;
    if (trimmed(line).empty() || line[0] == '#') continue;
    auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != m + 2)
      throw parse_error("'" + path + "': row " + std::to_string(lineno) + " has " +
                        std::to_string(cells.size()) + " cells, expected " + std::to_string(m + 2));
    std::string rid = trimmed(cells[0]);
    if (id.empty())
      id = rid;
    else if (rid != id)
      throw parse_error("'" + path + "': multiple episode ids ('" + id + "' vs '" + rid +
                        "'); one episode per file");
    Row r;
    r.t = parse_double(trimmed(cells[1]), lineno, 1);
    r.vals.resize(m, 0.0);
    r.present.resize(m, false);
    int npresent = 0;
    for (int j = 0; j < m; ++j) {
      std::string cell = trimmed(cells[j + 2]);
      if (cell.empty()) continue;
      r.vals[j] = parse_double(cell, lineno, j + 2);
      r.present[j] = true;
      ++npresent;
    }
    if (npresent == 0)
      throw data_error("'" + path + "': row " + std::to_string(lineno) + " has no observed values");
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw empty_data("'" + path + "': no data rows");

  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.t < b.t; });
  for (size_t i = 0; i + 1 < rows.size(); ++i)
    if (rows[i].t == rows[i + 1].t)
      throw duplicate_timestamp("'" + path + "': duplicate time " + std::to_string(rows[i].t));

  const Eigen::Index N = static_cast<Eigen::Index>(rows.size());
  Episode ep;
  ep.id = id;
  ep.channels = channels;
  ep.times.resize(N);
  ep.obs = Matrix::Zero(N, m);
  ep.mask = Mask::Constant(N, m, false);
  for (Eigen::Index i = 0; i < N; ++i) {
    ep.times(i) = rows[i].t;
    for (int j = 0; j < m; ++j) {
      ep.obs(i, j) = rows[i].vals[j];
      ep.mask(i, j) = rows[i].present[j];
    }
  }
  ep.validate();
  return ep;
}

namespace {
std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

void write_episode_csv(const Episode& ep, const std::string& path,
                       const std::vector<std::string>& comments) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write '" + path + "'");
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "episode_id,time";
  for (const auto& c : ep.channels) out << "," << c;
  out << "\n";
  for (Eigen::Index i = 0; i < ep.n(); ++i) {
    out << ep.id << "," << fmt17(ep.times(i));
    for (Eigen::Index j = 0; j < ep.m(); ++j) {
      out << ",";
      if (ep.mask(i, j)) out << fmt17(ep.obs(i, j));
    }
    out << "\n";
  }
  if (!out) throw data_error("write failed on '" + path + "'");
}

std::pair<Episode, Episode> split_last(const Episode& ep, Eigen::Index k) {
  if (k < 1) throw empty_holdout("split_last: hold-out size must be >= 1");
  if (k >= ep.n())
    throw empty_training("split_last: hold-out " + std::to_string(k) + " leaves no training rows (N=" +
                         std::to_string(ep.n()) + ")");
  const Eigen::Index ntr = ep.n() - k;
  Episode train, test;
  train.id = ep.id;
  test.id = ep.id;
  train.channels = ep.channels;
  test.channels = ep.channels;
  train.times = ep.times.head(ntr);
  test.times = ep.times.tail(k);
  train.obs = ep.obs.topRows(ntr);
  test.obs = ep.obs.bottomRows(k);
  train.mask = ep.mask.topRows(ntr);
  test.mask = ep.mask.bottomRows(k);
  return {train, test};
}

}  // namespace mgp
