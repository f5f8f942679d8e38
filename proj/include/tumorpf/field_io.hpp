#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "tumorpf/grid.hpp"
#include "tumorpf/model.hpp"

namespace tpf {

/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

/// Numeric CSV with one header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Column position, or -1.
  int column(const std::string& name) const;
};

/// Throws Io when the file cannot be read, Config on malformed content.
CsvTable read_csv(const std::string& path);

/// Header: index, x[, y], then `names`. One row per node.
void write_node_csv(const std::string& path, const Grid& grid,
                    const std::vector<std::string>& names, const std::vector<const Field*>& fields);

/// Header: level, t_start, t_end, index, x[, y], then `names`; one row per
/// (level, node). Series are piecewise constant on (t_level, t_level+1].
void write_level_csv(const std::string& path, const Grid& grid, const TimeGrid& time,
                     const std::vector<std::string>& names,
                     const std::vector<const FieldSeries*>& series);

inline void write_control_csv(const std::string& path, const Grid& grid, const TimeGrid& time,
                              const Control& u) {
  write_level_csv(path, grid, time, {"u1", "u2"}, {&u.u1, &u.u2});
}

/// Plain header + rows writer for tables that are not node fields.
void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

/// Node field from a table with an `index` column. `column` empty means the
/// last column. A `level` column is rejected.
Field field_from_table(const CsvTable& table, const Grid& grid, const std::string& column,
                       const std::string& what);

/// `levels` fields from a table with `index` and, optionally, `level`
/// columns; without `level` the one field is repeated.
FieldSeries series_from_table(const CsvTable& table, const Grid& grid, int levels,
                              const std::string& column, const std::string& what);

/// Pretty-printed with a trailing newline.
void write_json(const std::string& path, const nlohmann::ordered_json& j);

}  // namespace tpf
