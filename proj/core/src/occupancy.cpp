#include "fleetpark/occupancy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "fleetpark/lot_model.hpp"

namespace fleetpark {

GridSpec GridSpec::for_layout(const LotLayout& layout) {
  const double d = layout.grid_size_m();
  return GridSpec{static_cast<int>(std::lround(layout.length_m() / d)),
                  static_cast<int>(std::lround(layout.width_m() / d)), d};
}

CellSet::CellSet(const GridSpec& grid)
    : grid_(grid), words_((static_cast<std::size_t>(grid.nx) * grid.ny + 63) / 64, 0) {}

bool CellSet::contains(Cell c) const {
  if (!grid_.in_bounds(c.i, c.j)) {
    return false;
  }
  const auto flat = static_cast<std::size_t>(c.j) * grid_.nx + c.i;
  return ((words_[flat / 64] >> (flat % 64)) & 1ULL) != 0;
}

void CellSet::insert(Cell c) {
  if (!grid_.in_bounds(c.i, c.j)) {
    return;
  }
  const auto flat = static_cast<std::size_t>(c.j) * grid_.nx + c.i;
  words_[flat / 64] |= 1ULL << (flat % 64);
}

void CellSet::clear() { std::fill(words_.begin(), words_.end(), 0); }

std::size_t CellSet::size() const {
  std::size_t n = 0;
  for (std::uint64_t w : words_) {
    n += static_cast<std::size_t>(std::popcount(w));
  }
  return n;
}

bool CellSet::empty() const {
  return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
}

void CellSet::require_same_grid(const CellSet& other) const {
  if (!(grid_ == other.grid_)) {
    throw std::invalid_argument("cell sets belong to different grids");
  }
}

bool CellSet::intersects(const CellSet& other) const {
  if (words_.empty() || other.words_.empty()) {
    return false;
  }
  require_same_grid(other);
  for (std::size_t k = 0; k < words_.size(); ++k) {
    if ((words_[k] & other.words_[k]) != 0) {
      return true;
    }
  }
  return false;
}

bool CellSet::is_subset_of(const CellSet& other) const {
  if (words_.empty()) {
    return true;
  }
  if (other.words_.empty()) {
    return empty();
  }
  require_same_grid(other);
  for (std::size_t k = 0; k < words_.size(); ++k) {
    if ((words_[k] & ~other.words_[k]) != 0) {
      return false;
    }
  }
  return true;
}

CellSet& CellSet::operator|=(const CellSet& other) {
  if (other.words_.empty()) {
    return *this;
  }
  if (words_.empty()) {
    *this = other;
    return *this;
  }
  require_same_grid(other);
  for (std::size_t k = 0; k < words_.size(); ++k) {
    words_[k] |= other.words_[k];
  }
  return *this;
}

CellSet& CellSet::operator&=(const CellSet& other) {
  if (other.words_.empty()) {
    clear();
    return *this;
  }
  if (words_.empty()) {
    return *this;
  }
  require_same_grid(other);
  for (std::size_t k = 0; k < words_.size(); ++k) {
    words_[k] &= other.words_[k];
  }
  return *this;
}

CellSet& CellSet::operator-=(const CellSet& other) {
  if (words_.empty() || other.words_.empty()) {
    return *this;
  }
  require_same_grid(other);
  for (std::size_t k = 0; k < words_.size(); ++k) {
    words_[k] &= ~other.words_[k];
  }
  return *this;
}

bool operator==(const CellSet& a, const CellSet& b) {
  if (a.words_.empty() || b.words_.empty()) {
    return a.empty() && b.empty();
  }
  return a.grid_ == b.grid_ && a.words_ == b.words_;
}

std::vector<Cell> CellSet::cells() const {
  std::vector<Cell> out;
  out.reserve(size());
  for_each([&](Cell c) { out.push_back(c); });
  return out;
}

namespace {

// Index range [lo, hi] of cells whose span overlaps (a, b) by more than eps.
std::pair<int, int> cell_span(double a, double b, double d, int n) {
  int lo = static_cast<int>(std::floor(a / d));
  int hi = static_cast<int>(std::floor(b / d));
  if ((lo + 1) * d - a <= kOverlapEps) ++lo;
  if (b - hi * d <= kOverlapEps) --hi;
  return {std::max(lo, 0), std::min(hi, n - 1)};
}

bool axis_aligned(double heading, bool& swapped) {
  const double s = std::sin(heading);
  const double c = std::cos(heading);
  if (std::abs(s) < 1e-12) {
    swapped = false;
    return true;
  }
  if (std::abs(c) < 1e-12) {
    swapped = true;
    return true;
  }
  return false;
}

}  // namespace

CellSet rasterize_footprint(const GridSpec& grid, const Pose& pose, const BodyDims& body) {
  CellSet out(grid);
  if (body.degenerate()) {
    return out;
  }
  bool swapped = false;
  if (axis_aligned(pose.heading, swapped)) {
    const double hx = 0.5 * (swapped ? body.width : body.length);
    const double hy = 0.5 * (swapped ? body.length : body.width);
    const auto [i0, i1] = cell_span(pose.x - hx, pose.x + hx, grid.d, grid.nx);
    const auto [j0, j1] = cell_span(pose.y - hy, pose.y + hy, grid.d, grid.ny);
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        out.insert({i, j});
      }
    }
    return out;
  }
  const Quad q = body_corners(pose, body);
  const Rect bb = bounds_of(q);
  const auto [i0, i1] = cell_span(bb.x_min, bb.x_max, grid.d, grid.nx);
  const auto [j0, j1] = cell_span(bb.y_min, bb.y_max, grid.d, grid.ny);
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      if (quad_overlaps_rect(q, grid.cell_rect(i, j))) {
        out.insert({i, j});
      }
    }
  }
  return out;
}

CellSet rasterize_swept(const GridSpec& grid, std::span<const Pose> poses, const BodyDims& body) {
  CellSet out(grid);
  for (const Pose& p : poses) {
    out |= rasterize_footprint(grid, p, body);
  }
  return out;
}

GridClaims::GridClaims(const GridSpec& grid)
    : grid_(grid), all_bodies_(grid), all_maneuvers_(grid) {}

void GridClaims::reset() {
  claims_.clear();
  all_bodies_.clear();
  all_maneuvers_.clear();
  ++epoch_;
}

void GridClaims::claim_body(int vehicle, CellSet cells) {
  all_bodies_ |= cells;
  claims_.push_back(Claim{vehicle, ClaimKind::kBody, std::move(cells)});
}

void GridClaims::claim_maneuver(int vehicle, CellSet cells) {
  all_maneuvers_ |= cells;
  claims_.push_back(Claim{vehicle, ClaimKind::kManeuver, std::move(cells)});
}

const CellSet* GridClaims::find(int vehicle, ClaimKind kind) const {
  for (const Claim& c : claims_) {
    if (c.vehicle == vehicle && c.kind == kind) {
      return &c.cells;
    }
  }
  return nullptr;
}

const CellSet* GridClaims::body(int vehicle) const { return find(vehicle, ClaimKind::kBody); }

const CellSet* GridClaims::maneuver(int vehicle) const {
  return find(vehicle, ClaimKind::kManeuver);
}

std::string GridClaims::render() const {
  std::string out;
  out.reserve(static_cast<std::size_t>((grid_.nx + 1) * grid_.ny));
  for (int j = grid_.ny - 1; j >= 0; --j) {
    for (int i = 0; i < grid_.nx; ++i) {
      char ch = '.';
      if (all_bodies_.contains({i, j})) {
        ch = 'B';
      } else if (all_maneuvers_.contains({i, j})) {
        ch = 'M';
      }
      out.push_back(ch);
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace fleetpark
