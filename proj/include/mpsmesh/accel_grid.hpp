#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "mpsmesh/error.hpp"
#include "mpsmesh/vec.hpp"

namespace mpsmesh {

using CellIndex = std::uint64_t;

template <int D>
using CellCoord = std::array<std::int64_t, D>;

// Dense bitset over grid cells.
class CellBits {
 public:
  CellBits() = default;
  explicit CellBits(std::uint64_t n) : words_((n + 63) / 64, 0), size_(n) {}

  bool test(CellIndex i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(CellIndex i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void reset(CellIndex i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  void clear() { std::fill(words_.begin(), words_.end(), 0); }
  void subtract(const CellBits& o) {
    for (std::size_t w = 0; w < words_.size() && w < o.words_.size(); ++w) words_[w] &= ~o.words_[w];
  }
  std::uint64_t size() const { return size_; }

  // First set bit in [from, to), or `to` when there is none.
  CellIndex find_next(CellIndex from, CellIndex to) const {
    while (from < to) {
      const std::uint64_t w = words_[from >> 6] >> (from & 63);
      if (w != 0) {
        const CellIndex hit = from + static_cast<CellIndex>(__builtin_ctzll(w));
        return hit < to ? hit : to;
      }
      from = (from | 63) + 1;
    }
    return to;
  }

  std::uint64_t count() const {
    std::uint64_t c = 0;
    for (auto w : words_) c += static_cast<std::uint64_t>(__builtin_popcountll(w));
    return c;
  }

 private:
  std::vector<std::uint64_t> words_;
  std::uint64_t size_ = 0;
};

// Uniform cell decomposition of a box. Cells are half-open
// [lo + i s, lo + (i+1) s) so two points in one cell are strictly closer
// than the cell diameter.
template <int D>
struct GridGeometry {
  Vec<D> origin;
  double cell_side = 0.0;
  CellCoord<D> dims{};

  std::uint64_t cell_count() const {
    std::uint64_t n = 1;
    for (int i = 0; i < D; ++i) n *= static_cast<std::uint64_t>(dims[i]);
    return n;
  }

  double cell_diameter() const { return cell_side * std::sqrt(double(D)); }

  std::int64_t axis_coord(double x, int axis) const {
    auto i = static_cast<std::int64_t>(std::floor((x - origin[axis]) / cell_side));
    return std::clamp<std::int64_t>(i, 0, dims[axis] - 1);
  }

  CellCoord<D> coord_of(const Vec<D>& p) const {
    CellCoord<D> c;
    for (int i = 0; i < D; ++i) c[i] = axis_coord(p[i], i);
    return c;
  }

  CellIndex index_of(const CellCoord<D>& c) const {
    CellIndex idx = 0;
    for (int i = D - 1; i >= 0; --i)
      idx = idx * static_cast<CellIndex>(dims[i]) + static_cast<CellIndex>(c[i]);
    return idx;
  }

  CellIndex index_of(const Vec<D>& p) const { return index_of(coord_of(p)); }

  CellCoord<D> coord_of_index(CellIndex idx) const {
    CellCoord<D> c;
    for (int i = 0; i < D; ++i) {
      c[i] = static_cast<std::int64_t>(idx % static_cast<CellIndex>(dims[i]));
      idx /= static_cast<CellIndex>(dims[i]);
    }
    return c;
  }

  Box<D> cell_box(const CellCoord<D>& c) const {
    Box<D> b;
    for (int i = 0; i < D; ++i) {
      b.lo[i] = origin[i] + static_cast<double>(c[i]) * cell_side;
      b.hi[i] = b.lo[i] + cell_side;
    }
    return b;
  }

  Vec<D> cell_center(const CellCoord<D>& c) const {
    Vec<D> p;
    for (int i = 0; i < D; ++i)
      p[i] = origin[i] + (static_cast<double>(c[i]) + 0.5) * cell_side;
    return p;
  }

  // Euclidean distance from p to the closed box of cell c.
  double distance_to_cell(const Vec<D>& p, const CellCoord<D>& c) const {
    double s = 0.0;
    for (int i = 0; i < D; ++i) {
      const double lo = origin[i] + static_cast<double>(c[i]) * cell_side;
      const double hi = lo + cell_side;
      const double d = p[i] < lo ? lo - p[i] : (p[i] > hi ? p[i] - hi : 0.0);
      s += d * d;
    }
    return std::sqrt(s);
  }
};

// Grid whose cells have diameter H/2: side H / (2 sqrt(d)).
template <int D>
GridGeometry<D> make_grid_geometry(const Box<D>& bbox, double h) {
  if (!(h > 0.0) || !std::isfinite(h))
    throw Error(ErrorKind::InvalidParams, "grid spacing H must be positive");
  for (int i = 0; i < D; ++i)
    if (!(bbox.hi[i] >= bbox.lo[i]))
      throw Error(ErrorKind::InvalidParams, "grid bounding box is empty");
  GridGeometry<D> g;
  g.origin = bbox.lo;
  g.cell_side = h / (2.0 * std::sqrt(double(D)));
  for (int i = 0; i < D; ++i) {
    const double n = std::ceil(bbox.extent(i) / g.cell_side);
    g.dims[i] = std::max<std::int64_t>(1, static_cast<std::int64_t>(n));
  }
  return g;
}

// Cell list with at most one node per cell and the occupied-cell set
// (cells fully covered by some node's conservative inhibition disk).
template <int D>
class AccelGrid {
 public:
  AccelGrid() = default;
  explicit AccelGrid(GridGeometry<D> geom)
      : geom_(geom), occupied_(geom.cell_count()), has_node_(geom.cell_count()) {}

  const GridGeometry<D>& geometry() const { return geom_; }
  std::uint64_t cell_count() const { return geom_.cell_count(); }

  bool is_blocked(CellIndex cell) const { return occupied_.test(cell); }
  bool has_node(CellIndex cell) const { return has_node_.test(cell); }

  std::optional<std::uint32_t> node_at(CellIndex cell) const {
    if (!has_node_.test(cell)) return std::nullopt;
    return node_of_cell_.at(cell);
  }

  void insert_node(CellIndex cell, std::uint32_t id) {
    if (has_node_.test(cell))
      throw std::logic_error("AccelGrid: cell already holds a node");
    has_node_.set(cell);
    node_of_cell_.emplace(cell, id);
  }

  // N+(x): every cell whose closed box is within rho of x. Any node y with
  // |x - y| < min(rho(x), rho(y)) lies in one of these cells.
  template <class Fn>
  void for_each_plus(const Vec<D>& x, double rho, Fn&& fn) const {
    CellCoord<D> lo, hi;
    for (int i = 0; i < D; ++i) {
      lo[i] = geom_.axis_coord(x[i] - rho, i);
      hi[i] = geom_.axis_coord(x[i] + rho, i);
    }
    CellCoord<D> c = lo;
    for_each_in_range(lo, hi, c, 0, [&](const CellCoord<D>& cc) {
      if (geom_.distance_to_cell(x, cc) <= rho) fn(geom_.index_of(cc));
    });
  }

  // Node ids stored in N+(x). Rows along axis 0 are clipped analytically
  // and scanned word-wise in the node bitmask. `fn` returns true to stop.
  template <class Fn>
  void for_each_node_plus(const Vec<D>& x, double rho, Fn&& fn) const {
    CellCoord<D> c;
    visit_rows(x, rho, rho * rho, D - 1, c, fn);
  }

  std::vector<CellIndex> neighbors_plus(const Vec<D>& x, double rho) const {
    std::vector<CellIndex> out;
    for_each_plus(x, rho, [&](CellIndex c) { out.push_back(c); });
    return out;
  }

  // N-(x): cells g with diam(g U C(x)) <= rho / (1 + A). With rho
  // A-Lipschitz every point of such a cell conflicts with x.
  template <class Fn>
  void for_each_minus(const Vec<D>& x, double rho, double lipschitz,
                      Fn&& fn) const {
    const double limit = rho / (1.0 + lipschitz);
    const double s = geom_.cell_side;
    const auto reach = static_cast<std::int64_t>(std::floor(limit / s)) - 1;
    if (reach < 0) return;
    const CellCoord<D> home = geom_.coord_of(x);
    CellCoord<D> lo, hi;
    for (int i = 0; i < D; ++i) {
      lo[i] = std::max<std::int64_t>(0, home[i] - reach);
      hi[i] = std::min<std::int64_t>(geom_.dims[i] - 1, home[i] + reach);
    }
    const double limit2 = limit * limit;
    CellCoord<D> c = lo;
    for_each_in_range(lo, hi, c, 0, [&](const CellCoord<D>& cc) {
      double span2 = 0.0;
      for (int i = 0; i < D; ++i) {
        const double w = s * static_cast<double>(std::llabs(cc[i] - home[i]) + 1);
        span2 += w * w;
      }
      if (span2 <= limit2) fn(geom_.index_of(cc));
    });
  }

  std::vector<CellIndex> neighbors_minus(const Vec<D>& x, double rho,
                                         double lipschitz) const {
    std::vector<CellIndex> out;
    for_each_minus(x, rho, lipschitz, [&](CellIndex c) { out.push_back(c); });
    return out;
  }

  // Marks N-(x) and the home cell of x as occupied.
  void mark_occupied(const Vec<D>& x, double rho, double lipschitz) {
    occupied_.set(geom_.index_of(x));
    for_each_minus(x, rho, lipschitz, [&](CellIndex c) { occupied_.set(c); });
  }

  // Only the home cell; used when fast rejection is disabled.
  void mark_home(const Vec<D>& x) { occupied_.set(geom_.index_of(x)); }

  // G \ G_occ restricted to cells flagged in `domain`.
  std::vector<CellIndex> unmarked_cells(const CellBits& domain) const {
    std::vector<CellIndex> out;
    const std::uint64_t n = cell_count();
    for (CellIndex c = 0; c < n; ++c)
      if (domain.test(c) && !occupied_.test(c)) out.push_back(c);
    return out;
  }

  std::uint64_t occupied_count() const { return occupied_.count(); }

  void reset() {
    occupied_.clear();
    has_node_.clear();
    node_of_cell_.clear();
  }

 private:
  // Squared distance from coordinate x to the slab of cell c along an axis.
  double slab_gap2(double x, std::int64_t c, int axis) const {
    const double lo = geom_.origin[axis] + static_cast<double>(c) * geom_.cell_side;
    const double hi = lo + geom_.cell_side;
    const double d = x < lo ? lo - x : (x > hi ? x - hi : 0.0);
    return d * d;
  }

  template <class Fn>
  bool visit_rows(const Vec<D>& x, double rho, double budget2, int axis,
                  CellCoord<D>& c, Fn& fn) const {
    if (axis == 0) {
      const double w = std::sqrt(budget2);
      c[0] = geom_.axis_coord(x[0] - w, 0);
      const CellIndex first = geom_.index_of(c);
      const CellIndex last = first + static_cast<CellIndex>(
                                         geom_.axis_coord(x[0] + w, 0) - c[0]);
      for (CellIndex i = has_node_.find_next(first, last + 1); i <= last;
           i = has_node_.find_next(i + 1, last + 1))
        if (fn(node_of_cell_.find(i)->second)) return true;
      return false;
    }
    const std::int64_t lo = geom_.axis_coord(x[axis] - rho, axis);
    const std::int64_t hi = geom_.axis_coord(x[axis] + rho, axis);
    for (c[axis] = lo; c[axis] <= hi; ++c[axis]) {
      const double rest = budget2 - slab_gap2(x[axis], c[axis], axis);
      if (rest >= 0.0 && visit_rows(x, rho, rest, axis - 1, c, fn)) return true;
    }
    return false;
  }

  template <class Fn>
  static void for_each_in_range(const CellCoord<D>& lo, const CellCoord<D>& hi,
                                CellCoord<D>& c, int axis, Fn&& fn) {
    if (axis == D) {
      fn(c);
      return;
    }
    for (c[axis] = lo[axis]; c[axis] <= hi[axis]; ++c[axis])
      for_each_in_range(lo, hi, c, axis + 1, fn);
  }

  GridGeometry<D> geom_;
  CellBits occupied_;
  CellBits has_node_;
  std::unordered_map<CellIndex, std::uint32_t> node_of_cell_;
};

}  // namespace mpsmesh
