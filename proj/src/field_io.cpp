#include "tumorpf/field_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tumorpf/error.hpp"

namespace tpf {

std::string format_number(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(os), ErrorCode::Io, "cannot write " + path);
  return os;
}

void close_out(std::ofstream& os, const std::string& path) {
  os.close();
  require(!os.fail(), ErrorCode::Io, "write failed: " + path);
}

void coordinate_header(std::ostream& os, const Grid& grid) {
  os << "index,x";
  if (grid.dim() == 2) os << ",y";
}

void coordinate_cells(std::ostream& os, const Grid& grid, std::size_t i) {
  os << i << ',' << format_number(grid.coordinate(i, 0));
  if (grid.dim() == 2) os << ',' << format_number(grid.coordinate(i, 1));
}

std::size_t node_index(double v, const Grid& grid, const std::string& what, std::size_t row) {
  require(v >= 0 && v == std::floor(v) && v < static_cast<double>(grid.size()), ErrorCode::Config,
          what + ": row " + std::to_string(row + 2) + " has node index " + format_number(v) +
              " outside 0.." + std::to_string(grid.size() - 1));
  return static_cast<std::size_t>(v);
}

int value_column(const CsvTable& t, const std::string& column, const std::string& what) {
  const int c = column.empty() ? static_cast<int>(t.header.size()) - 1 : t.column(column);
  require(c >= 0, ErrorCode::Config, what + ": no column '" + column + "'");
  return c;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorCode::Io, "cannot read " + path);
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    require(cells.size() == t.header.size(), ErrorCode::Config,
            path + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                " cells, found " + std::to_string(cells.size()));
    std::vector<double> row(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string& c = cells[i];
      const auto res = std::from_chars(c.data(), c.data() + c.size(), row[i]);
      require(res.ec == std::errc() && res.ptr == c.data() + c.size(), ErrorCode::Config,
              path + ":" + std::to_string(lineno) + ": '" + c + "' is not a number");
    }
    t.rows.push_back(std::move(row));
  }
  require(!t.header.empty(), ErrorCode::Config, path + ": empty file");
  return t;
}

void write_node_csv(const std::string& path, const Grid& grid,
                    const std::vector<std::string>& names, const std::vector<const Field*>& fields) {
  std::ofstream os = open_out(path);
  coordinate_header(os, grid);
  for (const auto& n : names) os << ',' << n;
  os << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    coordinate_cells(os, grid, i);
    for (const Field* f : fields) os << ',' << format_number((*f)[static_cast<Eigen::Index>(i)]);
    os << '\n';
  }
  close_out(os, path);
}

void write_level_csv(const std::string& path, const Grid& grid, const TimeGrid& time,
                     const std::vector<std::string>& names,
                     const std::vector<const FieldSeries*>& series) {
  std::ofstream os = open_out(path);
  os << "level,t_start,t_end,";
  coordinate_header(os, grid);
  for (const auto& n : names) os << ',' << n;
  os << '\n';
  const int levels = series.empty() ? 0 : static_cast<int>(series.front()->size());
  for (int n = 0; n < levels; ++n) {
    const std::string prefix =
        std::to_string(n) + ',' + format_number(time.time(n)) + ',' + format_number(time.time(n + 1)) + ',';
    for (std::size_t i = 0; i < grid.size(); ++i) {
      os << prefix;
      coordinate_cells(os, grid, i);
      for (const FieldSeries* s : series)
        os << ',' << format_number((*s)[static_cast<std::size_t>(n)][static_cast<Eigen::Index>(i)]);
      os << '\n';
    }
  }
  close_out(os, path);
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  std::ofstream os = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_number(r[i]);
    os << '\n';
  }
  close_out(os, path);
}

Field field_from_table(const CsvTable& t, const Grid& grid, const std::string& column,
                       const std::string& what) {
  require(t.column("level") < 0, ErrorCode::Config,
          what + ": a time-independent field cannot have a 'level' column");
  const int ic = t.column("index");
  require(ic >= 0, ErrorCode::Config, what + ": missing 'index' column");
  const int vc = value_column(t, column, what);
  Field f(grid.size());
  std::vector<bool> seen(grid.size(), false);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t i = node_index(t.rows[r][ic], grid, what, r);
    require(!seen[i], ErrorCode::Config, what + ": node " + std::to_string(i) + " given twice");
    seen[i] = true;
    f[static_cast<Eigen::Index>(i)] = t.rows[r][vc];
  }
  require(t.rows.size() == grid.size(), ErrorCode::Config,
          what + ": " + std::to_string(t.rows.size()) + " rows for " + std::to_string(grid.size()) +
              " nodes");
  return f;
}

FieldSeries series_from_table(const CsvTable& t, const Grid& grid, int levels,
                              const std::string& column, const std::string& what) {
  const int lc = t.column("level");
  if (lc < 0) return FieldSeries(static_cast<std::size_t>(levels), field_from_table(t, grid, column, what));
  const int ic = t.column("index");
  require(ic >= 0, ErrorCode::Config, what + ": missing 'index' column");
  const int vc = value_column(t, column, what);
  FieldSeries s(static_cast<std::size_t>(levels), grid.zeros());
  std::vector<bool> seen(grid.size() * static_cast<std::size_t>(levels), false);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double lv = t.rows[r][lc];
    require(lv >= 0 && lv == std::floor(lv) && lv < levels, ErrorCode::Config,
            what + ": row " + std::to_string(r + 2) + " has level " + format_number(lv) +
                " outside 0.." + std::to_string(levels - 1));
    const auto n = static_cast<std::size_t>(lv);
    const std::size_t i = node_index(t.rows[r][ic], grid, what, r);
    require(!seen[n * grid.size() + i], ErrorCode::Config,
            what + ": level " + std::to_string(n) + " node " + std::to_string(i) + " given twice");
    seen[n * grid.size() + i] = true;
    s[n][static_cast<Eigen::Index>(i)] = t.rows[r][vc];
  }
  require(t.rows.size() == seen.size(), ErrorCode::Config,
          what + ": " + std::to_string(t.rows.size()) + " rows for " + std::to_string(levels) +
              " levels of " + std::to_string(grid.size()) + " nodes");
  return s;
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream os = open_out(path);
  os << j.dump(2) << '\n';
  close_out(os, path);
}

}  // namespace tpf
