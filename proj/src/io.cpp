#include "goursat2d/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "goursat2d/error.hpp"

namespace goursat2d {

std::string format_double17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_grid_csv(const std::vector<std::pair<std::string, const GridField*>>& groups) {
  if (groups.empty()) throw InvalidArgument("grid CSV needs at least one field");
  const Grid& grid = groups.front().second->grid();
  for (const auto& [name, field] : groups) {
    if (!(field->grid() == grid)) throw ShapeError("grid CSV: field '" + name + "' is on another grid");
  }
  std::string out = "i,j,x,y";
  for (const auto& [name, field] : groups) {
    for (int k = 1; k <= field->dim(); ++k) out += "," + name + "_" + std::to_string(k);
  }
  out += "\n";
  const int nodes = grid.nodes_per_axis();
  for (int i = 0; i < nodes; ++i) {
    for (int j = 0; j < nodes; ++j) {
      out += std::to_string(i) + "," + std::to_string(j) + "," + format_double17(grid.coord(i)) +
             "," + format_double17(grid.coord(j));
      for (const auto& [name, field] : groups) {
        for (double v : field->at(i, j)) out += "," + format_double17(v);
      }
      out += "\n";
    }
  }
  return out;
}

std::string format_solution_csv(const GridField& g, const StateTriple& state) {
  return format_grid_csv({{"g", &g}, {"z", &state.z}, {"zx", &state.zx}, {"zy", &state.zy}});
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

double parse_number(std::string_view cell, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || !std::isfinite(v)) {
    throw SchemaError("line " + std::to_string(line_no),
                      "'" + std::string(cell) + "' is not a finite number");
  }
  return v;
}

}  // namespace

GridFile parse_grid_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    start = end + 1;
  }
  if (lines.empty()) throw SchemaError("header", "grid file is empty");

  const auto header = split_commas(lines.front());
  if (header.size() < 5 || header[0] != "i" || header[1] != "j" || header[2] != "x" ||
      header[3] != "y") {
    throw SchemaError("header", "expected columns i,j,x,y followed by field components");
  }
  // Group columns name_1..name_n in order.
  struct Group {
    std::string name;
    std::size_t first_column;
    int dim;
  };
  std::vector<Group> groups;
  for (std::size_t c = 4; c < header.size(); ++c) {
    const std::string_view col = header[c];
    const std::size_t underscore = col.rfind('_');
    if (underscore == std::string_view::npos || underscore == 0) {
      throw SchemaError("header", "column '" + std::string(col) + "' is not of the form name_k");
    }
    const std::string name(col.substr(0, underscore));
    int k = 0;
    const auto idx = col.substr(underscore + 1);
    const auto res = std::from_chars(idx.data(), idx.data() + idx.size(), k);
    if (res.ec != std::errc() || res.ptr != idx.data() + idx.size()) {
      throw SchemaError("header", "column '" + std::string(col) + "' has no component index");
    }
    if (!groups.empty() && groups.back().name == name) {
      if (k != groups.back().dim + 1) {
        throw SchemaError("header", "components of '" + name + "' are out of order");
      }
      ++groups.back().dim;
    } else {
      if (k != 1) throw SchemaError("header", "components of '" + name + "' must start at 1");
      for (const auto& g : groups) {
        if (g.name == name) throw SchemaError("header", "field '" + name + "' appears twice");
      }
      groups.push_back(Group{name, c, 1});
    }
  }

  const std::size_t rows = lines.size() - 1;
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(rows))));
  if (side * side != rows || side < 3) {
    throw SchemaError("rows", "expected (N+1)^2 data rows with N >= 2, got " + std::to_string(rows));
  }
  GridFile file;
  file.grid = Grid(static_cast<int>(side) - 1);
  for (const auto& g : groups) file.groups.emplace(g.name, GridField(file.grid, g.dim));

  const int nodes = file.grid.nodes_per_axis();
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t line_no = r + 2;
    const auto cells = split_commas(lines[r + 1]);
    if (cells.size() != header.size()) {
      throw SchemaError("line " + std::to_string(line_no), "wrong number of columns");
    }
    const int i = static_cast<int>(r) / nodes;
    const int j = static_cast<int>(r) % nodes;
    if (parse_number(cells[0], line_no) != i || parse_number(cells[1], line_no) != j) {
      throw SchemaError("line " + std::to_string(line_no), "rows must be ordered by i, then j");
    }
    if (std::abs(parse_number(cells[2], line_no) - file.grid.coord(i)) > 1e-12 ||
        std::abs(parse_number(cells[3], line_no) - file.grid.coord(j)) > 1e-12) {
      throw SchemaError("line " + std::to_string(line_no), "node coordinates do not match a uniform grid");
    }
    for (const auto& g : groups) {
      GridField& field = file.groups.at(g.name);
      for (int k = 0; k < g.dim; ++k) {
        field(i, j, k) = parse_number(cells[g.first_column + static_cast<std::size_t>(k)], line_no);
      }
    }
  }
  return file;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

GridFile read_grid_file(const std::filesystem::path& path) {
  try {
    return parse_grid_csv(read_text_file(path));
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ":" + e.path(), e.message());
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InvalidArgument("failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace goursat2d
