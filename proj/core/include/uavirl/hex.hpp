#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace uavirl {

// Flat-top hexagon in axial coordinates. North is +r, the UAV grid uses an
// "odd-q" offset layout with odd columns shifted half a cell north.
struct CellCoord {
  int q = 0;
  int r = 0;

  friend bool operator==(const CellCoord&, const CellCoord&) = default;
};

struct OffsetCoord {
  int col = 0;
  int row = 0;

  friend bool operator==(const OffsetCoord&, const OffsetCoord&) = default;
};

enum class Direction : std::uint8_t { N = 0, NE = 1, SE = 2, S = 3, SW = 4, NW = 5 };

inline constexpr int kNumDirections = 6;
inline constexpr std::array<Direction, kNumDirections> kAllDirections = {
    Direction::N, Direction::NE, Direction::SE, Direction::S, Direction::SW, Direction::NW};

std::string_view direction_name(Direction d);
std::optional<Direction> parse_direction(std::string_view name);
CellCoord direction_delta(Direction d);
Direction opposite(Direction d);

CellCoord offset_to_axial(OffsetCoord o);
OffsetCoord axial_to_offset(CellCoord c);

// Standard axial hex distance.
int hex_distance(CellCoord a, CellCoord b);

// Rectangular grid of cols x rows offset cells.
class HexGrid {
 public:
  HexGrid(int cols, int rows);

  int cols() const { return cols_; }
  int rows() const { return rows_; }
  int size() const { return cols_ * rows_; }

  bool contains(CellCoord c) const;
  // Row-major index: row * cols + col.
  int index_of(CellCoord c) const;
  CellCoord cell_at(int index) const;

  // Adjacent cell, or the same cell when the move would leave the grid.
  CellCoord neighbor(CellCoord c, Direction d) const;
  // Adjacent cell only if it is on the grid.
  std::optional<CellCoord> adjacent(CellCoord c, Direction d) const;

  // Planar center of a cell (meters) for the given circumradius.
  std::array<double, 2> center(CellCoord c, double cell_radius_m) const;

  int max_distance() const;

 private:
  int cols_;
  int rows_;
};

}  // namespace uavirl
