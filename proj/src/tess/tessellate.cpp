#include "ogb/tess/tessellate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace ogb::tess {

namespace {

std::int64_t
ipow(std::int64_t base, int exp)
{
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i)
    r *= base;
  return r;
}

std::int64_t
floor_div(std::int64_t a, std::int64_t b)
{
  auto q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0)))
    --q;
  return q;
}

double
snap(double v)
{
  double r = std::round(v);
  return std::abs(v - r) < 1e-7 ? r : v;
}

double
span_overlap(double a0, double a1, double b0, double b1)
{
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

} // namespace

std::int64_t
GridSpec::unit_x(int level) const
{
  return ipow(ratio_x, levels - 1 - level);
}

std::int64_t
GridSpec::unit_y(int level) const
{
  return ipow(ratio_y, levels - 1 - level);
}

std::vector<Cell>
children(const GridSpec& spec, const Cell& c)
{
  if (c.level + 1 >= spec.levels)
    return {};
  std::vector<Cell> out;
  out.reserve(static_cast<std::size_t>(spec.ratio_x * spec.ratio_y));
  for (std::int64_t dx = 0; dx < spec.ratio_x; ++dx)
    for (std::int64_t dy = 0; dy < spec.ratio_y; ++dy)
      out.push_back({c.level + 1, c.ix * spec.ratio_x + dx, c.iy * spec.ratio_y + dy});
  return out;
}

Cell
parent(const GridSpec& spec, const Cell& c)
{
  if (c.level == 0)
    throw std::invalid_argument("level-0 cell has no parent");
  return {c.level - 1, floor_div(c.ix, spec.ratio_x), floor_div(c.iy, spec.ratio_y)};
}

bool
is_ancestor(const GridSpec& spec, const Cell& a, const Cell& c)
{
  if (a.level >= c.level)
    return false;
  auto fx = spec.unit_x(a.level) / spec.unit_x(c.level);
  auto fy = spec.unit_y(a.level) / spec.unit_y(c.level);
  return floor_div(c.ix, fx) == a.ix && floor_div(c.iy, fy) == a.iy;
}

std::string
default_cell_name(const Cell& c)
{
  return std::to_string(c.level) + "/" + std::to_string(c.ix) + "/" + std::to_string(c.iy);
}

std::int64_t
Region::finest_count(const GridSpec& spec) const
{
  return static_cast<std::int64_t>(min_stretch_tiles(spec, *this).size());
}

BoxRegion::BoxRegion(double x0, double y0, double x1, double y1)
  : m_x0(snap(x0))
  , m_y0(snap(y0))
  , m_x1(snap(x1))
  , m_y1(snap(y1))
{
  if (!(m_x0 < m_x1) || !(m_y0 < m_y1))
    throw std::invalid_argument("empty region");
  m_fx0 = static_cast<std::int64_t>(std::floor(m_x0));
  m_fy0 = static_cast<std::int64_t>(std::floor(m_y0));
  m_fx1 = static_cast<std::int64_t>(std::ceil(m_x1));
  m_fy1 = static_cast<std::int64_t>(std::ceil(m_y1));
}

double
BoxRegion::overlap(const GridSpec& spec, const Cell& c) const
{
  auto ux = spec.unit_x(c.level), uy = spec.unit_y(c.level);
  double cx0 = static_cast<double>(c.ix * ux), cy0 = static_cast<double>(c.iy * uy);
  return span_overlap(m_x0, m_x1, cx0, cx0 + static_cast<double>(ux)) *
         span_overlap(m_y0, m_y1, cy0, cy0 + static_cast<double>(uy));
}

bool
BoxRegion::complete(const GridSpec& spec, const Cell& c) const
{
  auto ux = spec.unit_x(c.level), uy = spec.unit_y(c.level);
  return m_fx0 <= c.ix * ux && (c.ix + 1) * ux <= m_fx1 && m_fy0 <= c.iy * uy && (c.iy + 1) * uy <= m_fy1;
}

std::vector<Cell>
BoxRegion::level0(const GridSpec& spec) const
{
  auto ux = spec.unit_x(0), uy = spec.unit_y(0);
  std::vector<Cell> out;
  for (auto x = floor_div(m_fx0, ux); x <= floor_div(m_fx1 - 1, ux); ++x)
    for (auto y = floor_div(m_fy0, uy); y <= floor_div(m_fy1 - 1, uy); ++y)
      out.push_back({0, x, y});
  return out;
}

CellSetRegion::CellSetRegion(std::set<std::pair<std::int64_t, std::int64_t>> cells)
  : m_cells(std::move(cells))
{
  if (m_cells.empty())
    throw std::invalid_argument("empty region");
}

double
CellSetRegion::overlap(const GridSpec& spec, const Cell& c) const
{
  auto ux = spec.unit_x(c.level), uy = spec.unit_y(c.level);
  std::int64_t n = 0;
  auto lo = m_cells.lower_bound({c.ix * ux, std::numeric_limits<std::int64_t>::min()});
  for (auto it = lo; it != m_cells.end() && it->first < (c.ix + 1) * ux; ++it)
    if (it->second >= c.iy * uy && it->second < (c.iy + 1) * uy)
      ++n;
  return static_cast<double>(n);
}

bool
CellSetRegion::complete(const GridSpec& spec, const Cell& c) const
{
  return overlap(spec, c) == spec.cell_area(c.level);
}

std::vector<Cell>
CellSetRegion::level0(const GridSpec& spec) const
{
  std::set<Cell> out;
  for (auto [x, y] : m_cells)
    out.insert({0, floor_div(x, spec.unit_x(0)), floor_div(y, spec.unit_y(0))});
  return {out.begin(), out.end()};
}

double
tile_stretch(const GridSpec& spec, const Region& region, const Cell& c)
{
  double ov = region.overlap(spec, c);
  if (ov <= 0)
    throw std::invalid_argument("cell does not meet the region");
  return spec.cell_area(c.level) / ov;
}

Tessellation
make_tessellation(const GridSpec& spec, const Region& region, std::vector<Cell> tiles, bool constraint_respected)
{
  Tessellation t;
  std::sort(tiles.begin(), tiles.end());
  t.tiles = std::move(tiles);
  for (const auto& c : t.tiles)
    t.covered_area += spec.cell_area(c.level);
  t.query_area = region.area();
  t.stretch = t.covered_area / t.query_area;
  t.constraint_respected = constraint_respected;
  return t;
}

std::vector<Cell>
IndexTree::leaves() const
{
  std::vector<Cell> out;
  for (const auto& [c, kids] : nodes)
    if (kids.empty())
      out.push_back(c);
  return out;
}

namespace {

void
collect_finest(const GridSpec& spec, const Region& region, const Cell& c, std::vector<Cell>& out)
{
  if (c.level == spec.levels - 1) {
    out.push_back(c);
    return;
  }
  for (const auto& k : children(spec, c))
    if (region.intersects(spec, k))
      collect_finest(spec, region, k, out);
}

void
expand(const GridSpec& spec, const Region& region, const Cell& c, bool stop_at_complete, IndexTree& tree)
{
  auto& kids = tree.nodes[c];
  if (c.level == spec.levels - 1 || (stop_at_complete && region.complete(spec, c)))
    return;
  std::vector<Cell> met;
  for (const auto& k : children(spec, c))
    if (region.intersects(spec, k))
      met.push_back(k);
  kids = met;
  for (const auto& k : met)
    expand(spec, region, k, stop_at_complete, tree);
}

} // namespace

std::vector<Cell>
min_stretch_tiles(const GridSpec& spec, const Region& region)
{
  std::vector<Cell> out;
  for (const auto& c : region.level0(spec))
    collect_finest(spec, region, c, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::int64_t
min_stretch_count(const GridSpec& spec, const Region& region)
{
  return region.finest_count(spec);
}

Tessellation
min_stretch(const GridSpec& spec, const Region& region)
{
  return make_tessellation(spec, region, min_stretch_tiles(spec, region));
}

IndexTree
min_stretch_tree(const GridSpec& spec, const Region& region)
{
  IndexTree tree;
  for (const auto& c : region.level0(spec))
    expand(spec, region, c, false, tree);
  return tree;
}

IndexTree
mst_reduce(const GridSpec& spec, IndexTree tree)
{
  auto full = static_cast<std::size_t>(spec.ratio_x * spec.ratio_y);
  for (int level = spec.levels - 2; level >= 0; --level) {
    for (auto& [c, kids] : tree.nodes) {
      if (c.level != level || kids.size() != full)
        continue;
      bool all_leaves = std::all_of(kids.begin(), kids.end(), [&](const Cell& k) { return tree.nodes.at(k).empty(); });
      if (!all_leaves)
        continue;
      for (const auto& k : kids)
        tree.nodes.erase(k);
      kids.clear();
    }
  }
  return tree;
}

IndexTree
mst_tree(const GridSpec& spec, const Region& region)
{
  IndexTree tree;
  for (const auto& c : region.level0(spec))
    expand(spec, region, c, true, tree);
  return tree;
}

Tessellation
min_stretch_and_tiles(const GridSpec& spec, const Region& region)
{
  return make_tessellation(spec, region, mst_tree(spec, region).leaves());
}

namespace {

/// Mutable tree with per-level counters and per-level candidate queues
/// used by the greedy algorithm.
class GreedyState
{
public:
  GreedyState(const GridSpec& spec, const Region& region, const ConstrainedOptions& options)
    : m_spec(spec)
    , m_region(region)
    , m_options(options)
    , m_nodes_at(static_cast<std::size_t>(spec.levels), 0)
    , m_leaves_at(static_cast<std::size_t>(spec.levels), 0)
  {
    auto less = [this](const Candidate& a, const Candidate& b) {
      if (a.stretch != b.stretch)
        return a.stretch < b.stretch;
      if (a.cell == b.cell)
        return false;
      auto na = m_options.name(a.cell), nb = m_options.name(b.cell);
      if (na != nb)
        return na < nb;
      return a.cell < b.cell;
    };
    for (int l = 0; l < spec.levels; ++l)
      m_candidates.emplace_back(less);

    auto tree = mst_tree(spec, region);
    for (auto& [c, kids] : tree.nodes) {
      auto lvl = static_cast<std::size_t>(c.level);
      ++m_nodes_at[lvl];
      if (kids.empty()) {
        ++m_leaves_at[lvl];
        ++m_leaves;
      }
      else {
        double s = tile_stretch(spec, region, c);
        m_candidates[lvl].insert({s, c});
        m_stretch.emplace(c, s);
      }
    }
    m_children = std::move(tree.nodes);
  }

  std::size_t leaves() const { return m_leaves; }

  /// Tile count if every node of level i+1 became a leaf.
  std::size_t
  count_if_collapsed_below(int i) const
  {
    std::size_t n = 0;
    for (int l = 0; l <= i; ++l)
      n += m_leaves_at[static_cast<std::size_t>(l)];
    return n + m_nodes_at[static_cast<std::size_t>(i + 1)];
  }

  bool
  collapse_best(int level)
  {
    auto& q = m_candidates[static_cast<std::size_t>(level)];
    if (q.empty())
      return false;
    auto best = *q.begin();
    if (m_options.on_collapse)
      m_options.on_collapse(best.cell, best.stretch);
    remove_descendants(best.cell);
    q.erase(q.begin());
    m_stretch.erase(best.cell);
    m_children[best.cell].clear();
    ++m_leaves_at[static_cast<std::size_t>(level)];
    ++m_leaves;
    return true;
  }

  std::vector<Cell>
  leaf_cells() const
  {
    std::vector<Cell> out;
    out.reserve(m_leaves);
    for (const auto& [c, kids] : m_children)
      if (kids.empty())
        out.push_back(c);
    return out;
  }

private:
  struct Candidate
  {
    double stretch;
    Cell cell;
  };
  using Queue = std::set<Candidate, std::function<bool(const Candidate&, const Candidate&)>>;

  void
  remove_descendants(const Cell& c)
  {
    auto kids = std::move(m_children[c]);
    for (const auto& k : kids) {
      auto lvl = static_cast<std::size_t>(k.level);
      --m_nodes_at[lvl];
      auto it = m_children.find(k);
      if (it->second.empty()) {
        --m_leaves_at[lvl];
        --m_leaves;
      }
      else {
        remove_descendants(k);
        m_candidates[lvl].erase({m_stretch.at(k), k});
        m_stretch.erase(k);
      }
      m_children.erase(k);
    }
  }

  const GridSpec& m_spec;
  const Region& m_region;
  const ConstrainedOptions& m_options;
  std::map<Cell, std::vector<Cell>> m_children;
  std::unordered_map<Cell, double, CellHash> m_stretch;
  std::vector<Queue> m_candidates;
  std::vector<std::size_t> m_nodes_at;
  std::vector<std::size_t> m_leaves_at;
  std::size_t m_leaves = 0;
};

} // namespace

Tessellation
constrained(const GridSpec& spec, const Region& region, std::size_t k, const ConstrainedOptions& options)
{
  if (k == 0)
    throw std::invalid_argument("k must be positive");
  auto cover0 = region.level0(spec);
  if (cover0.size() > k)
    return make_tessellation(spec, region, std::move(cover0), false);

  GreedyState state(spec, region, options);
  while (state.leaves() > k) {
    bool progressed = false;
    for (int i = 0; i + 1 < spec.levels; ++i) {
      if (state.count_if_collapsed_below(i) > k) {
        progressed = state.collapse_best(i);
        break;
      }
    }
    if (!progressed)
      throw std::logic_error("constrained tessellation made no progress");
  }
  return make_tessellation(spec, region, state.leaf_cells(), true);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// best[c] = minimum covered area using exactly c tiles, c in [0, k].
struct DpNode
{
  std::vector<double> best;
  bool self_possible = false;
  /// prefix[j][c]: best over the first j children with c tiles.
  std::vector<std::vector<double>> prefix;
};

class CutDp
{
public:
  CutDp(const GridSpec& spec, const Region& region, std::size_t k, IndexTree tree)
    : m_spec(spec)
    , m_region(region)
    , m_k(k)
    , m_tree(std::move(tree))
  {
  }

  std::vector<std::vector<double>>
  combine(const std::vector<Cell>& kids)
  {
    std::vector<std::vector<double>> prefix;
    std::vector<double> acc(m_k + 1, kInf);
    acc[0] = 0;
    prefix.push_back(acc);
    for (const auto& kid : kids) {
      const auto& kb = solve(kid);
      std::vector<double> next(m_k + 1, kInf);
      for (std::size_t a = 0; a <= m_k; ++a) {
        if (acc[a] == kInf)
          continue;
        for (std::size_t b = 1; a + b <= m_k; ++b)
          if (kb[b] != kInf)
            next[a + b] = std::min(next[a + b], acc[a] + kb[b]);
      }
      acc = std::move(next);
      prefix.push_back(acc);
    }
    return prefix;
  }

  const std::vector<double>&
  solve(const Cell& c)
  {
    auto it = m_memo.find(c);
    if (it != m_memo.end())
      return it->second.best;
    DpNode node;
    const auto& kids = m_tree.nodes.at(c);
    if (kids.empty()) {
      node.best.assign(m_k + 1, kInf);
    }
    else {
      node.prefix = combine(kids);
      node.best = node.prefix.back();
    }
    double own = m_spec.cell_area(c.level);
    if (m_k >= 1 && own <= node.best[1]) {
      node.best[1] = own;
      node.self_possible = true;
    }
    return m_memo.emplace(c, std::move(node)).first->second.best;
  }

  void
  realize(const Cell& c, std::size_t count, std::vector<Cell>& out)
  {
    const auto& node = m_memo.at(c);
    if (count == 1 && node.self_possible) {
      out.push_back(c);
      return;
    }
    realize_children(m_tree.nodes.at(c), node.prefix, count, out);
  }

  void
  realize_children(const std::vector<Cell>& kids, const std::vector<std::vector<double>>& prefix, std::size_t count,
                   std::vector<Cell>& out)
  {
    for (std::size_t j = kids.size(); j-- > 0;) {
      const auto& kb = m_memo.at(kids[j]).best;
      double target = prefix[j + 1][count];
      bool found = false;
      for (std::size_t b = 1; b <= count; ++b) {
        if (kb[b] == kInf || prefix[j][count - b] == kInf)
          continue;
        if (prefix[j][count - b] + kb[b] == target) {
          realize(kids[j], b, out);
          count -= b;
          found = true;
          break;
        }
      }
      if (!found)
        throw std::logic_error("dp reconstruction failed");
    }
  }

private:
  const GridSpec& m_spec;
  const Region& m_region;
  std::size_t m_k;
  IndexTree m_tree;
  std::map<Cell, DpNode> m_memo;
};

} // namespace

Tessellation
brute_force_optimal(const GridSpec& spec, const Region& region, std::size_t k, std::size_t max_nodes)
{
  if (k == 0)
    throw std::invalid_argument("k must be positive");
  auto roots = region.level0(spec);
  if (roots.size() > k)
    return make_tessellation(spec, region, std::move(roots), false);
  if (region.finest_count(spec) > static_cast<std::int64_t>(max_nodes))
    throw InstanceTooLarge("instance exceeds the exhaustive-search bound");
  auto tree = min_stretch_tree(spec, region);
  if (tree.nodes.size() > max_nodes)
    throw InstanceTooLarge("instance exceeds the exhaustive-search bound");

  CutDp dp(spec, region, k, std::move(tree));
  auto prefix = dp.combine(roots);
  const auto& best = prefix.back();
  std::size_t best_count = 0;
  for (std::size_t c = 1; c <= k; ++c)
    if (best[c] < (best_count ? best[best_count] : kInf))
      best_count = c;
  std::vector<Cell> tiles;
  dp.realize_children(roots, prefix, best_count, tiles);
  return make_tessellation(spec, region, std::move(tiles), true);
}

} // namespace ogb::tess
