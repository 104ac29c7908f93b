#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "goursat2d/grid.hpp"

namespace goursat2d {

/// Contents of a grid CSV: columns i, j, x, y followed by groups name_1..name_n.
struct GridFile {
  Grid grid{2};
  std::map<std::string, GridField> groups;
};

/// Binary64 with 17 significant digits ("%.17g").
std::string format_double17(double v);

/// CSV text with header "i,j,x,y,<name>_1..<name>_n,..." and rows ordered by
/// i, then j. All groups must share one grid.
std::string format_grid_csv(const std::vector<std::pair<std::string, const GridField*>>& groups);

/// Solution grid: groups g, z, zx, zy.
std::string format_solution_csv(const GridField& g, const StateTriple& state);

/// Parses text produced by format_grid_csv. Throws SchemaError on malformed input.
GridFile parse_grid_csv(std::string_view text);
GridFile read_grid_file(const std::filesystem::path& path);

/// Writes through a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace goursat2d
