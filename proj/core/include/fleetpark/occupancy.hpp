#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fleetpark/geometry.hpp"

namespace fleetpark {

class LotLayout;

/// Uniform grid over the lot. Cell (i, j) covers [i*d, (i+1)*d) x [j*d, (j+1)*d).
struct GridSpec {
  int nx = 0;
  int ny = 0;
  double d = 1.0;

  static GridSpec for_layout(const LotLayout& layout);

  bool in_bounds(int i, int j) const { return i >= 0 && j >= 0 && i < nx && j < ny; }
  Rect cell_rect(int i, int j) const { return {i * d, j * d, (i + 1) * d, (j + 1) * d}; }
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct Cell {
  int i = 0;
  int j = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Set of grid cells stored as a dense bitset over the whole grid. The lot
/// is small (a few thousand cells), so intersection tests are a handful of
/// word operations.
class CellSet {
 public:
  CellSet() = default;
  explicit CellSet(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }

  bool contains(Cell c) const;
  /// Out-of-bounds cells are ignored.
  void insert(Cell c);
  void clear();

  std::size_t size() const;
  bool empty() const;
  bool intersects(const CellSet& other) const;
  bool is_subset_of(const CellSet& other) const;

  CellSet& operator|=(const CellSet& other);
  CellSet& operator&=(const CellSet& other);
  /// Set difference.
  CellSet& operator-=(const CellSet& other);
  friend CellSet operator|(CellSet a, const CellSet& b) { return a |= b; }
  friend CellSet operator&(CellSet a, const CellSet& b) { return a &= b; }
  friend CellSet operator-(CellSet a, const CellSet& b) { return a -= b; }
  friend bool operator==(const CellSet& a, const CellSet& b);

  /// Cells in row-major order (j, then i).
  std::vector<Cell> cells() const;

  template <typename F>
  void for_each(F&& f) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits != 0) {
        const int b = std::countr_zero(bits);
        const auto flat = static_cast<int>(w * 64 + static_cast<std::size_t>(b));
        f(Cell{flat % grid_.nx, flat / grid_.nx});
        bits &= bits - 1;
      }
    }
  }

 private:
  void require_same_grid(const CellSet& other) const;

  GridSpec grid_;
  std::vector<std::uint64_t> words_;
};

/// Cells whose squares overlap the oriented body with strictly positive area.
/// Parts of the body outside the grid are dropped.
CellSet rasterize_footprint(const GridSpec& grid, const Pose& pose, const BodyDims& body);

/// Union of footprints over a pose sequence.
CellSet rasterize_swept(const GridSpec& grid, std::span<const Pose> poses, const BodyDims& body);

/// True iff the two claims share a cell.
inline bool claims_intersect(const CellSet& a, const CellSet& b) { return a.intersects(b); }

enum class ClaimKind { kBody, kManeuver };

struct Claim {
  int vehicle = -1;
  ClaimKind kind = ClaimKind::kBody;
  CellSet cells;
};

/// Occupancy claims for one simulation step: each vehicle's body (B) and,
/// for admitted maneuvers, the remaining maneuver sweep (B_M).
class GridClaims {
 public:
  explicit GridClaims(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  /// Drops every claim and starts a new epoch.
  void reset();
  std::uint64_t epoch() const { return epoch_; }

  void claim_body(int vehicle, CellSet cells);
  void claim_maneuver(int vehicle, CellSet cells);

  /// nullptr when the vehicle holds no claim of that kind.
  const CellSet* body(int vehicle) const;
  const CellSet* maneuver(int vehicle) const;

  /// In claim order.
  const std::vector<Claim>& claims() const { return claims_; }
  const CellSet& all_bodies() const { return all_bodies_; }
  const CellSet& all_maneuvers() const { return all_maneuvers_; }

  /// Text raster, top row first: 'B' body, 'M' maneuver-only, '.' free.
  std::string render() const;

 private:
  const CellSet* find(int vehicle, ClaimKind kind) const;

  GridSpec grid_;
  std::vector<Claim> claims_;
  CellSet all_bodies_;
  CellSet all_maneuvers_;
  std::uint64_t epoch_ = 0;
};

}  // namespace fleetpark
