#include "uavirl/hex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "uavirl/errors.hpp"

namespace uavirl {

namespace {
constexpr std::array<std::string_view, kNumDirections> kNames = {"N", "NE", "SE", "S", "SW", "NW"};
constexpr std::array<CellCoord, kNumDirections> kDeltas = {
    CellCoord{0, 1}, CellCoord{1, 0}, CellCoord{1, -1}, CellCoord{0, -1}, CellCoord{-1, 0}, CellCoord{-1, 1}};
}  // namespace

std::string_view direction_name(Direction d) { return kNames[static_cast<int>(d)]; }

std::optional<Direction> parse_direction(std::string_view name) {
  for (int i = 0; i < kNumDirections; ++i) {
    if (kNames[i] == name) return static_cast<Direction>(i);
  }
  return std::nullopt;
}

CellCoord direction_delta(Direction d) { return kDeltas[static_cast<int>(d)]; }

Direction opposite(Direction d) { return static_cast<Direction>((static_cast<int>(d) + 3) % kNumDirections); }

CellCoord offset_to_axial(OffsetCoord o) { return {o.col, o.row - (o.col - (o.col & 1)) / 2}; }

OffsetCoord axial_to_offset(CellCoord c) { return {c.q, c.r + (c.q - (c.q & 1)) / 2}; }

int hex_distance(CellCoord a, CellCoord b) {
  const int dq = a.q - b.q;
  const int dr = a.r - b.r;
  return (std::abs(dq) + std::abs(dr) + std::abs(dq + dr)) / 2;
}

HexGrid::HexGrid(int cols, int rows) : cols_(cols), rows_(rows) {
  if (cols <= 0 || rows <= 0) throw ConfigError("grid: cols and rows must be > 0");
}

bool HexGrid::contains(CellCoord c) const {
  const OffsetCoord o = axial_to_offset(c);
  return o.col >= 0 && o.col < cols_ && o.row >= 0 && o.row < rows_;
}

int HexGrid::index_of(CellCoord c) const {
  if (!contains(c)) throw ContractError("grid: cell is off the grid");
  const OffsetCoord o = axial_to_offset(c);
  return o.row * cols_ + o.col;
}

CellCoord HexGrid::cell_at(int index) const {
  if (index < 0 || index >= size()) throw ContractError("grid: cell index out of range");
  return offset_to_axial({index % cols_, index / cols_});
}

std::optional<CellCoord> HexGrid::adjacent(CellCoord c, Direction d) const {
  const CellCoord delta = direction_delta(d);
  const CellCoord n{c.q + delta.q, c.r + delta.r};
  if (!contains(n)) return std::nullopt;
  return n;
}

CellCoord HexGrid::neighbor(CellCoord c, Direction d) const { return adjacent(c, d).value_or(c); }

std::array<double, 2> HexGrid::center(CellCoord c, double cell_radius_m) const {
  const double x = 1.5 * cell_radius_m * c.q;
  const double y = std::sqrt(3.0) * cell_radius_m * (c.r + 0.5 * c.q);
  return {x, y};
}

int HexGrid::max_distance() const {
  int best = 0;
  for (int i = 0; i < size(); ++i) {
    for (int j = i + 1; j < size(); ++j) best = std::max(best, hex_distance(cell_at(i), cell_at(j)));
  }
  return best;
}

}  // namespace uavirl
