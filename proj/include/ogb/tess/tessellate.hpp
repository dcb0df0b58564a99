#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace ogb::tess {

/// Hierarchical grid: level 0 is the coarsest; each cell of level l splits
/// into ratio_x * ratio_y cells of level l+1. Coordinates are expressed in
/// finest-level cell units.
struct GridSpec
{
  int levels = 3;
  std::int64_t ratio_x = 10;
  std::int64_t ratio_y = 10;

  /// Side of a level cell, in finest units.
  std::int64_t unit_x(int level) const;
  std::int64_t unit_y(int level) const;
  double cell_area(int level) const { return static_cast<double>(unit_x(level) * unit_y(level)); }

  static GridSpec geo() { return {3, 10, 10}; }
  /// Two-by-two splitting, as in the level-ratio-4 illustrations.
  static GridSpec quad() { return {3, 2, 2}; }
  /// Periods of 10000, 1000, 100, 10 and 1 minutes.
  static GridSpec temporal() { return {5, 10, 1}; }
};

struct Cell
{
  int level = 0;
  std::int64_t ix = 0;
  std::int64_t iy = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct CellHash
{
  std::size_t
  operator()(const Cell& c) const noexcept
  {
    auto h = static_cast<std::uint64_t>(c.ix) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(c.iy) + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h ^ static_cast<std::uint64_t>(c.level));
  }
};

std::vector<Cell>
children(const GridSpec& spec, const Cell& c);

Cell
parent(const GridSpec& spec, const Cell& c);

bool
is_ancestor(const GridSpec& spec, const Cell& ancestor, const Cell& c);

/// Default tie-break name: "level/ix/iy".
std::string
default_cell_name(const Cell& c);

/// The area A being tessellated.
class Region
{
public:
  virtual ~Region() = default;

  /// Area of A, in finest units squared.
  virtual double area() const = 0;

  /// Area of cell ∩ A.
  virtual double overlap(const GridSpec& spec, const Cell& c) const = 0;

  /// True when every finest descendant of c meets A.
  virtual bool complete(const GridSpec& spec, const Cell& c) const = 0;

  /// Level-0 cells meeting A, sorted.
  virtual std::vector<Cell> level0(const GridSpec& spec) const = 0;

  /// Number of finest cells meeting A.
  virtual std::int64_t finest_count(const GridSpec& spec) const;

  bool intersects(const GridSpec& spec, const Cell& c) const { return overlap(spec, c) > 0; }
};

/// Half-open rectangle [x0,x1) x [y0,y1) in finest units.
class BoxRegion final : public Region
{
public:
  BoxRegion(double x0, double y0, double x1, double y1);

  double area() const override { return (m_x1 - m_x0) * (m_y1 - m_y0); }
  double overlap(const GridSpec& spec, const Cell& c) const override;
  bool complete(const GridSpec& spec, const Cell& c) const override;
  std::vector<Cell> level0(const GridSpec& spec) const override;
  std::int64_t finest_count(const GridSpec&) const override { return (m_fx1 - m_fx0) * (m_fy1 - m_fy0); }

private:
  double m_x0, m_y0, m_x1, m_y1;
  std::int64_t m_fx0, m_fy0, m_fx1, m_fy1; // finest cells met, exclusive upper bound
};

/// Arbitrary union of finest cells; used to build illustrative instances.
class CellSetRegion final : public Region
{
public:
  explicit CellSetRegion(std::set<std::pair<std::int64_t, std::int64_t>> cells);

  double area() const override { return static_cast<double>(m_cells.size()); }
  double overlap(const GridSpec& spec, const Cell& c) const override;
  bool complete(const GridSpec& spec, const Cell& c) const override;
  std::vector<Cell> level0(const GridSpec& spec) const override;

private:
  std::set<std::pair<std::int64_t, std::int64_t>> m_cells;
};

/// Ratio between the cell area and the area of its intersection with A.
/// Throws std::invalid_argument if the cell does not meet A.
double
tile_stretch(const GridSpec& spec, const Region& region, const Cell& c);

struct Tessellation
{
  std::vector<Cell> tiles;
  double covered_area = 0;
  double query_area = 0;
  double stretch = 1;
  bool constraint_respected = true;
};

Tessellation
make_tessellation(const GridSpec& spec, const Region& region, std::vector<Cell> tiles,
                  bool constraint_respected = true);

/// Tree of cells meeting A. A node without children is a leaf; leaves form
/// the current tessellation.
struct IndexTree
{
  std::map<Cell, std::vector<Cell>> nodes;

  std::vector<Cell>
  leaves() const;
};

/// Every finest cell meeting A, sorted.
std::vector<Cell>
min_stretch_tiles(const GridSpec& spec, const Region& region);

/// Number of finest cells meeting A, without enumerating them.
std::int64_t
min_stretch_count(const GridSpec& spec, const Region& region);

Tessellation
min_stretch(const GridSpec& spec, const Region& region);

/// Minimum stretch tree: all finest cells meeting A plus their ancestors.
IndexTree
min_stretch_tree(const GridSpec& spec, const Region& region);

/// Replaces, bottom-up, every node whose full set of children are leaves
/// by a single leaf.
IndexTree
mst_reduce(const GridSpec& spec, IndexTree tree);

/// Minimum stretch-and-tiles tree built top-down: a node is a leaf as soon
/// as it is complete. Equal to mst_reduce(min_stretch_tree(...)).
IndexTree
mst_tree(const GridSpec& spec, const Region& region);

Tessellation
min_stretch_and_tiles(const GridSpec& spec, const Region& region);

struct ConstrainedOptions
{
  /// Names used to break exact stretch ties, smallest first.
  std::function<std::string(const Cell&)> name = default_cell_name;
  /// Optional observer of each collapse step (cell, its tile-stretch).
  std::function<void(const Cell&, double)> on_collapse;
};

/// Greedy top-down tessellation bounded by k tiles. When even the level-0
/// cover exceeds k, that cover is returned with constraint_respected unset.
Tessellation
constrained(const GridSpec& spec, const Region& region, std::size_t k, const ConstrainedOptions& options = {});

class InstanceTooLarge : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Exact minimum-area disjoint cover with at most k tiles, by dynamic
/// programming over the cuts of the minimum stretch tree. Throws
/// InstanceTooLarge when the tree exceeds max_nodes.
Tessellation
brute_force_optimal(const GridSpec& spec, const Region& region, std::size_t k, std::size_t max_nodes = 20000);

} // namespace ogb::tess
