#include "mpsmesh/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "mpsmesh/error.hpp"
#include "mpsmesh/predicates.hpp"
#include "mpsmesh/rng.hpp"

namespace mpsmesh {

namespace {

constexpr int kInfinite = -1;
constexpr double kDuplicateTolerance = 1e-12;

template <int D>
void check_duplicates(std::span<const Vec<D>> pts) {
  std::vector<std::uint32_t> idx(pts.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
    return pts[a][0] < pts[b][0] || (pts[a][0] == pts[b][0] && a < b);
  });
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = i + 1; j < idx.size(); ++j) {
      if (pts[idx[j]][0] - pts[idx[i]][0] > kDuplicateTolerance) break;
      if (distance(pts[idx[i]], pts[idx[j]]) <= kDuplicateTolerance)
        throw Error(ErrorKind::DuplicatePoints,
                    "points " + std::to_string(std::min(idx[i], idx[j])) +
                        " and " + std::to_string(std::max(idx[i], idx[j])) +
                        " coincide");
    }
  }
}

// Bowyer-Watson insertion over a triangulation of the convex hull closed by
// ghost cells: every hull facet carries a cell whose last vertex is the
// infinite vertex. A point conflicts with a ghost cell when it lies strictly
// beyond the hull facet, or on the facet's plane strictly inside its
// circumcircle (on the open segment in 2D).
template <int D>
class Triangulator {
 public:
  static constexpr int N = D + 1;
  struct Cell {
    std::array<int, N> v;
    std::array<int, N> n;
  };

  explicit Triangulator(std::span<const Vec<D>> pts) : pts_(pts) {}

  void build(std::span<const std::uint32_t> order) {
    std::vector<std::uint32_t> seq;
    if (order.empty()) {
      seq.resize(pts_.size());
      std::iota(seq.begin(), seq.end(), 0u);
    } else {
      seq.assign(order.begin(), order.end());
    }
    check_duplicates<D>(pts_);
    const auto init = initial_simplex(seq);
    for (auto q : seq) {
      if (std::find(init.begin(), init.end(), static_cast<int>(q)) != init.end())
        continue;
      insert(static_cast<int>(q));
    }
  }

  std::vector<std::array<std::uint32_t, N>> real_cells() const {
    std::vector<std::array<std::uint32_t, N>> out;
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      if (!alive_[c] || is_ghost(static_cast<int>(c))) continue;
      std::array<std::uint32_t, N> s;
      for (int i = 0; i < N; ++i) s[i] = static_cast<std::uint32_t>(cells_[c].v[i]);
      out.push_back(canonical(s));
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Flips cocircular edges towards the diagonal with the lower id sum.
  void resolve_cocircular_ties() requires(D == 2) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (int c = 0; c < static_cast<int>(cells_.size()); ++c) {
        if (!alive_[c] || is_ghost(c)) continue;
        for (int i = 0; i < 3; ++i) {
          const int nb = cells_[c].n[i];
          if (is_ghost(nb)) continue;
          const int j = slot_of(nb, c);
          const int x = cells_[c].v[i], d = cells_[nb].v[j];
          const int a = cells_[c].v[(i + 1) % 3], b = cells_[c].v[(i + 2) % 3];
          if (x + d >= a + b) continue;
          if (predicates::incircle(pts_[a], pts_[b], pts_[x], pts_[d]) != 0)
            continue;
          flip(c, i);
          changed = true;
          break;
        }
      }
    }
  }

 private:
  bool is_ghost(int c) const { return cells_[c].v[N - 1] == kInfinite; }

  int slot_of(int c, int neighbor) const {
    for (int i = 0; i < N; ++i)
      if (cells_[c].n[i] == neighbor) return i;
    return -1;
  }

  static std::array<std::uint32_t, N> canonical(std::array<std::uint32_t, N> s) {
    if constexpr (D == 2) {
      const auto m = std::min_element(s.begin(), s.end()) - s.begin();
      std::rotate(s.begin(), s.begin() + m, s.end());
    } else {
      // Sort ascending; an odd permutation is undone by swapping the last
      // two entries so the orientation is preserved.
      int swaps = 0;
      for (int i = 0; i < N; ++i)
        for (int j = 0; j + 1 < N - i; ++j)
          if (s[j] > s[j + 1]) {
            std::swap(s[j], s[j + 1]);
            ++swaps;
          }
      if (swaps % 2) std::swap(s[N - 2], s[N - 1]);
    }
    return s;
  }

  int orient(const std::array<int, N>& v) const {
    if constexpr (D == 2)
      return predicates::orient2d(pts_[v[0]], pts_[v[1]], pts_[v[2]]);
    else
      return predicates::orient3d(pts_[v[0]], pts_[v[1]], pts_[v[2]], pts_[v[3]]);
  }

  // Orientation of real cell c with vertex i replaced by point q.
  int orient_replaced(int c, int i, int q) const {
    auto v = cells_[c].v;
    v[i] = q;
    return orient(v);
  }

  bool conflict(int c, int q) const {
    const auto& v = cells_[c].v;
    const auto& p = pts_[q];
    if constexpr (D == 2) {
      if (v[2] == kInfinite) {
        const int o = predicates::orient2d(pts_[v[0]], pts_[v[1]], p);
        if (o != 0) return o > 0;
        const auto& u = pts_[v[0]];
        const auto& w = pts_[v[1]];
        return dot(p - u, w - u) > 0.0 && dot(p - w, u - w) > 0.0;
      }
      return predicates::incircle(pts_[v[0]], pts_[v[1]], pts_[v[2]], p) > 0;
    } else {
      if (v[3] == kInfinite) {
        const int o = predicates::orient3d(pts_[v[0]], pts_[v[1]], pts_[v[2]], p);
        if (o != 0) return o > 0;
        return predicates::incircle3d_coplanar(pts_[v[0]], pts_[v[1]],
                                               pts_[v[2]], p) > 0;
      }
      return predicates::insphere(pts_[v[0]], pts_[v[1]], pts_[v[2]],
                                  pts_[v[3]], p) > 0;
    }
  }

  bool collinear(int a, int b, int c) const {
    if constexpr (D == 2) {
      return predicates::orient2d(pts_[a], pts_[b], pts_[c]) == 0;
    } else {
      auto proj = [&](int i, int x, int y) {
        return Point2{pts_[i][x], pts_[i][y]};
      };
      for (auto [x, y] : {std::pair{0, 1}, std::pair{1, 2}, std::pair{0, 2}})
        if (predicates::orient2d(proj(a, x, y), proj(b, x, y), proj(c, x, y)) != 0)
          return false;
      return true;
    }
  }

  std::array<int, N> initial_simplex(const std::vector<std::uint32_t>& seq) {
    const ErrorKind degenerate = D == 2 ? ErrorKind::AllCollinear : ErrorKind::AllCoplanar;
    const char* what = D == 2 ? "points are collinear" : "points are coplanar";
    if (seq.size() < static_cast<std::size_t>(N)) throw Error(degenerate, what);
    std::array<int, N> s;
    s[0] = static_cast<int>(seq[0]);
    s[1] = static_cast<int>(seq[1]);
    std::size_t k = 2;
    for (; k < seq.size(); ++k)
      if (!collinear(s[0], s[1], static_cast<int>(seq[k]))) break;
    if (k == seq.size()) throw Error(degenerate, what);
    s[2] = static_cast<int>(seq[k]);
    if constexpr (D == 3) {
      for (k = 2; k < seq.size(); ++k) {
        const int q = static_cast<int>(seq[k]);
        if (q == s[2]) continue;
        if (predicates::orient3d(pts_[s[0]], pts_[s[1]], pts_[s[2]], pts_[q]) != 0)
          break;
      }
      if (k == seq.size()) throw Error(degenerate, what);
      s[3] = static_cast<int>(seq[k]);
    }
    if (orient(s) < 0) std::swap(s[0], s[1]);

    cells_.push_back({s, {}});
    for (int i = 0; i < N; ++i) {
      std::array<int, N> g;
      int m = 0;
      for (int j = 0; j < N; ++j)
        if (j != i) g[m++] = s[j];
      g[N - 1] = kInfinite;
      // The outer side of the hull facet must be the positive side.
      auto probe = g;
      probe[N - 1] = s[i];
      if (orient(probe) > 0) std::swap(g[0], g[1]);
      cells_.push_back({g, {}});
    }
    alive_.assign(cells_.size(), 1);
    stamp_.assign(cells_.size(), 0);
    std::vector<int> all(cells_.size());
    std::iota(all.begin(), all.end(), 0);
    link(all, kInfinite - 1);
    last_ = 0;
    return s;
  }

  // Matches the facets of `cells` that contain `apex` (or all facets when
  // apex is not a vertex) and links them pairwise.
  void link(const std::vector<int>& cells, int apex) {
    struct Facet {
      std::array<int, N> key;
      int cell, slot;
    };
    std::vector<Facet> facets;
    for (int c : cells) {
      const auto& v = cells_[c].v;
      const bool has_apex = std::find(v.begin(), v.end(), apex) != v.end();
      for (int i = 0; i < N; ++i) {
        if (has_apex && v[i] == apex) continue;
        Facet f{{}, c, i};
        int m = 0;
        for (int j = 0; j < N; ++j)
          if (j != i) f.key[m++] = v[j];
        f.key[N - 1] = std::numeric_limits<int>::max();
        std::sort(f.key.begin(), f.key.end());
        facets.push_back(f);
      }
    }
    std::sort(facets.begin(), facets.end(),
              [](const Facet& a, const Facet& b) { return a.key < b.key; });
    for (std::size_t i = 0; i + 1 < facets.size(); i += 2) {
      cells_[facets[i].cell].n[facets[i].slot] = facets[i + 1].cell;
      cells_[facets[i + 1].cell].n[facets[i + 1].slot] = facets[i].cell;
    }
  }

  int locate(int q) {
    int c = last_;
    if (!alive_[c]) {
      c = 0;
      while (!alive_[c]) ++c;
    }
    if (is_ghost(c)) c = cells_[c].n[N - 1];
    // Visibility walk; acyclic on Delaunay triangulations.
    for (;;) {
      if (is_ghost(c)) return c;
      int next = -1;
      for (int i = 0; i < N; ++i) {
        if (orient_replaced(c, i, q) < 0) {
          next = cells_[c].n[i];
          break;
        }
      }
      if (next < 0) return c;
      c = next;
    }
  }

  int allocate(const Cell& cell) {
    if (!free_.empty()) {
      const int c = free_.back();
      free_.pop_back();
      cells_[c] = cell;
      alive_[c] = 1;
      stamp_[c] = 0;
      return c;
    }
    cells_.push_back(cell);
    alive_.push_back(1);
    stamp_.push_back(0);
    return static_cast<int>(cells_.size()) - 1;
  }

  void insert(int q) {
    const int start = locate(q);
    epoch_ += 2;
    const unsigned in = epoch_, out = epoch_ + 1;
    cavity_.clear();
    boundary_.clear();
    cavity_.push_back(start);
    stamp_[start] = in;
    for (std::size_t k = 0; k < cavity_.size(); ++k) {
      const int c = cavity_[k];
      for (int i = 0; i < N; ++i) {
        const int nb = cells_[c].n[i];
        if (stamp_[nb] == in) continue;
        if (stamp_[nb] != out && conflict(nb, q)) {
          stamp_[nb] = in;
          cavity_.push_back(nb);
        } else {
          stamp_[nb] = out;
          boundary_.push_back({c, i});
        }
      }
    }
    created_.clear();
    for (auto [c, i] : boundary_) {
      Cell cell = cells_[c];
      cell.v[i] = q;
      const int nb = cells_[c].n[i];
      const int back = slot_of(nb, c);
      const int id = allocate(cell);
      cells_[id].n[i] = nb;
      cells_[nb].n[back] = id;
      created_.push_back(id);
    }
    for (int c : cavity_) {
      alive_[c] = 0;
      free_.push_back(c);
    }
    link(created_, q);
    last_ = created_.front();
    for (int c : created_)
      if (!is_ghost(c)) {
        last_ = c;
        break;
      }
  }

  void flip(int c, int i) requires(D == 2) {
    const int nb = cells_[c].n[i];
    const int j = slot_of(nb, c);
    const int x = cells_[c].v[i];
    const int a = cells_[c].v[(i + 1) % 3];
    const int b = cells_[c].v[(i + 2) % 3];
    const int d = cells_[nb].v[j];
    const int n_xb = cells_[c].n[(i + 1) % 3];  // across b-x
    const int n_ax = cells_[c].n[(i + 2) % 3];  // across x-a
    // In nb = (d, b, a): across a-d is opposite b, across d-b opposite a.
    const int n_ad = cells_[nb].n[(j + 1) % 3];
    const int n_db = cells_[nb].n[(j + 2) % 3];
    cells_[c] = {{x, a, d}, {n_ad, nb, n_ax}};
    cells_[nb] = {{x, d, b}, {n_db, n_xb, c}};
    cells_[n_ad].n[slot_of(n_ad, nb)] = c;
    cells_[n_xb].n[slot_of(n_xb, c)] = nb;
  }

  std::span<const Vec<D>> pts_;
  std::vector<Cell> cells_;
  std::vector<char> alive_;
  std::vector<unsigned> stamp_;
  std::vector<int> free_;
  std::vector<int> cavity_, created_;
  std::vector<std::pair<int, int>> boundary_;
  unsigned epoch_ = 0;
  int last_ = 0;
};

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

int tag_priority(Tag t) {
  switch (t) {
    case Tag::polygon_vertex: return 0;
    case Tag::boundary: return 1;
    case Tag::intersection: return 2;
    case Tag::interior: return 3;
    case Tag::matrix_boundary: return 4;
    case Tag::volume: return 5;
  }
  return 6;
}

}  // namespace

std::vector<Triangle> delaunay2d(std::span<const Point2> points,
                                 std::span<const std::uint32_t> order) {
  Triangulator<2> t(points);
  t.build(order);
  t.resolve_cocircular_ties();
  return t.real_cells();
}

std::vector<Tetrahedron> delaunay3d(std::span<const Point3> points,
                                    std::span<const std::uint32_t> order) {
  Triangulator<3> t(points);
  t.build(order);
  return t.real_cells();
}

std::vector<std::uint32_t> insertion_order(std::span<const Tag> tags) {
  std::vector<std::uint32_t> order(tags.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return tag_priority(tags[a]) < tag_priority(tags[b]);
  });
  return order;
}

std::vector<Edge> mesh_edges(std::span<const Triangle> triangles) {
  std::vector<Edge> out;
  out.reserve(3 * triangles.size());
  for (const auto& t : triangles)
    for (int i = 0; i < 3; ++i) {
      const auto a = t[i], b = t[(i + 1) % 3];
      out.push_back({std::min(a, b), std::max(a, b)});
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Edge> mesh_edges(std::span<const Tetrahedron> tets) {
  std::vector<Edge> out;
  out.reserve(6 * tets.size());
  for (const auto& t : tets)
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        out.push_back({std::min(t[i], t[j]), std::max(t[i], t[j])});
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ConformingResult make_conforming(std::span<const Point2> points,
                                 std::span<const Edge> subsegments,
                                 std::span<const Tag> tags) {
  const auto n = points.size();
  std::vector<char> endpoint(n, 0);
  double cell = 0.0;
  for (const auto& s : subsegments) {
    if (s[0] >= n || s[1] >= n)
      throw Error(ErrorKind::SegmentEndpointMissing,
                  "sub-segment (" + std::to_string(s[0]) + ", " +
                      std::to_string(s[1]) + ") refers to a missing point");
    endpoint[s[0]] = endpoint[s[1]] = 1;
    cell = std::fmax(cell, distance(points[s[0]], points[s[1]]));
  }

  ConformingResult res;
  std::vector<char> removed(n, 0);
  if (!subsegments.empty() && cell > 0.0) {
    // Bucket the points at the longest sub-segment length so each diametral
    // circle touches at most the 3x3 buckets around its center.
    auto key = [&](const Point2& p) {
      const auto i = static_cast<std::int64_t>(std::floor(p[0] / cell));
      const auto j = static_cast<std::int64_t>(std::floor(p[1] / cell));
      return std::pair{i, j};
    };
    auto hash = [](std::int64_t i, std::int64_t j) {
      return static_cast<std::uint64_t>(i) * 0x9E3779B97F4A7C15ull ^
             static_cast<std::uint64_t>(j);
    };
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;
    for (std::uint32_t i = 0; i < n; ++i) {
      const auto [bi, bj] = key(points[i]);
      buckets[hash(bi, bj)].push_back(i);
    }
    for (const auto& s : subsegments) {
      const Point2& a = points[s[0]];
      const Point2& b = points[s[1]];
      const auto [ci, cj] = key(0.5 * (a + b));
      for (std::int64_t di = -1; di <= 1; ++di)
        for (std::int64_t dj = -1; dj <= 1; ++dj) {
          const auto it = buckets.find(hash(ci + di, cj + dj));
          if (it == buckets.end()) continue;
          for (auto q : it->second) {
            if (q == s[0] || q == s[1] || removed[q]) continue;
            // Strictly inside the circle with diameter ab.
            if (dot(points[q] - a, points[q] - b) >= 0.0) continue;
            const bool keep =
                endpoint[q] || (!tags.empty() && (tags[q] == Tag::intersection ||
                                                  tags[q] == Tag::polygon_vertex));
            if (keep) {
              res.protected_hits.push_back(q);
            } else {
              removed[q] = 1;
            }
          }
        }
    }
  }

  std::vector<std::uint32_t> remap(n, UINT32_MAX);
  std::vector<Tag> kept_tags;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (removed[i]) {
      res.removed.push_back(i);
      continue;
    }
    remap[i] = static_cast<std::uint32_t>(res.kept.size());
    res.kept.push_back(i);
    res.mesh.points.push_back(points[i]);
    if (!tags.empty()) kept_tags.push_back(tags[i]);
  }
  std::sort(res.protected_hits.begin(), res.protected_hits.end());
  res.protected_hits.erase(
      std::unique(res.protected_hits.begin(), res.protected_hits.end()),
      res.protected_hits.end());

  const auto order = insertion_order(kept_tags);
  res.mesh.cells = delaunay2d(res.mesh.points, order);

  std::unordered_set<std::uint64_t> edges;
  for (const auto& e : mesh_edges(res.mesh.cells)) edges.insert(edge_key(e[0], e[1]));
  for (const auto& s : subsegments) {
    const Edge e{remap[s[0]], remap[s[1]]};
    res.mesh.constrained_edges.push_back(e);
    if (!edges.count(edge_key(e[0], e[1]))) res.missing.push_back(e);
  }
  return res;
}

std::vector<Triangle> clip_to_polygon(std::span<const Point2> points,
                                      std::span<const Triangle> triangles,
                                      std::span<const Point2> polygon) {
  // Nodes sampled on a polygon edge are collinear only up to rounding, so
  // the hull can carry flat triangles along the boundary whose centroid
  // falls inside. A triangle with all three corners on one edge is dropped.
  Box2 box = Box2::empty();
  for (const auto& p : polygon) box.expand(p);
  const double tol = 1e-9 * box.diagonal();
  const std::size_t ne = polygon.size();
  // A point lies on at most two edges (at a vertex).
  std::vector<std::array<std::int64_t, 2>> on_edge(points.size(), {-1, -1});
  for (std::size_t i = 0; i < points.size(); ++i) {
    int n = 0;
    for (std::size_t e = 0; e < ne && n < 2; ++e)
      if (point_segment_distance(points[i], polygon[e], polygon[(e + 1) % ne]) <= tol)
        on_edge[i][n++] = static_cast<std::int64_t>(e);
  }
  const auto has = [&](std::uint32_t i, std::int64_t e) {
    return e >= 0 && (on_edge[i][0] == e || on_edge[i][1] == e);
  };

  std::vector<Triangle> out;
  for (const auto& t : triangles) {
    bool flat = false;
    for (auto e : on_edge[t[0]]) flat = flat || (has(t[1], e) && has(t[2], e));
    if (flat) continue;
    const Point2 c = (points[t[0]] + points[t[1]] + points[t[2]]) * (1.0 / 3.0);
    if (point_in_polygon(c, polygon)) out.push_back(t);
  }
  return out;
}

// ---------------------------------------------------------------------------

void SliverThresholds::validate() const {
  if (!(min_dihedral >= 0.0 && min_dihedral < max_dihedral && max_dihedral <= 180.0))
    throw Error(ErrorKind::InvalidParams,
                "dihedral thresholds must satisfy 0 <= min < max <= 180");
  if (!(min_aspect >= 0.0 && min_aspect <= 1.0))
    throw Error(ErrorKind::InvalidParams, "min_aspect must lie in [0, 1]");
}

std::vector<std::uint32_t> detect_slivers(std::span<const Point3> points,
                                          std::span<const Tetrahedron> tets,
                                          const SliverThresholds& th) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t c = 0; c < tets.size(); ++c) {
    const auto& t = tets[c];
    const TetQuality q =
        tet_quality(points[t[0]], points[t[1]], points[t[2]], points[t[3]]);
    if (q.min_dihedral < th.min_dihedral || q.max_dihedral > th.max_dihedral ||
        q.aspect < th.min_aspect)
      out.push_back(c);
  }
  return out;
}

namespace {

double distance_to_plane(const Point3& p, const Point3& a, const Point3& b,
                         const Point3& c) {
  const Point3 n = cross(b - a, c - a);
  const double len = norm(n);
  if (len == 0.0) return 0.0;
  return std::fabs(dot(p - a, n)) / len;
}

}  // namespace

SliverLoopResult sliver_removal_loop(Sample3 sample, const Box3& box,
                                     const RadiusField3D& field,
                                     std::span<const StandoffSurface> surfaces,
                                     const SliverThresholds& thresholds,
                                     const SamplerOptions& opts,
                                     std::uint64_t seed, int max_iters) {
  thresholds.validate();
  SliverLoopResult res;
  for (int iter = 0;; ++iter) {
    res.mesh.points = sample.points;
    res.mesh.cells = delaunay3d(sample.points, insertion_order(sample.tags));
    const auto slivers = detect_slivers(res.mesh.points, res.mesh.cells, thresholds);
    if (slivers.empty()) {
      res.converged = true;
      break;
    }
    if (iter >= max_iters) break;

    SliverIteration it;
    it.slivers = slivers.size();
    std::vector<char> remove(sample.size(), 0);
    for (auto c : slivers) {
      const auto& t = res.mesh.cells[c];
      std::vector<std::pair<double, std::uint32_t>> cand;
      for (int i = 0; i < 4; ++i) {
        if (sample.tags[t[i]] != Tag::volume) continue;
        const auto& a = sample.points[t[(i + 1) % 4]];
        const auto& b = sample.points[t[(i + 2) % 4]];
        const auto& d = sample.points[t[(i + 3) % 4]];
        cand.emplace_back(distance_to_plane(sample.points[t[i]], a, b, d), t[i]);
      }
      if (cand.empty()) {
        ++it.unremovable;
        continue;
      }
      std::sort(cand.begin(), cand.end());
      int taken = 0;
      for (const auto& [dist, id] : cand)
        if (remove[id]) ++taken;
      for (const auto& [dist, id] : cand) {
        if (taken >= 2) break;
        if (remove[id]) continue;
        remove[id] = 1;
        ++taken;
      }
    }
    Sample3 survivors;
    survivors.rng_seed = sample.rng_seed;
    std::vector<Sphere<3>> holes;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      if (remove[i]) {
        ++it.removed;
        holes.push_back({sample.points[i], 2.0 * sample.rho[i]});
        continue;
      }
      survivors.push(sample.points[i], sample.rho[i], sample.tags[i], sample.keys[i]);
    }
    if (it.removed == 0) {
      it.nodes = sample.size();
      it.cells = res.mesh.cells.size();
      res.log.push_back(it);
      break;
    }
    // Only the holes are refilled: darts in their unmarked cells, then the
    // main pass from the nodes those darts add.
    SamplerOptions refill = opts;
    refill.resample_rounds = std::max(1, opts.resample_rounds);
    auto resampled = sample_volume_3d(
        survivors, box, field, surfaces, refill,
        hash_seed({seed, 0x5117E5ull, static_cast<std::uint64_t>(iter)}), holes);
    sample = std::move(resampled.sample);
    it.nodes = sample.size();
    it.cells = res.mesh.cells.size();
    res.log.push_back(it);
  }
  res.sample = std::move(sample);
  return res;
}

// ---------------------------------------------------------------------------

namespace {

void add_metric(QualityReport& r, const std::string& name, double width,
                std::vector<double> values) {
  MetricSummary s;
  Histogram h;
  h.bin_width = width;
  if (!values.empty()) {
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
             static_cast<double>(values.size());
  }
  s.n = values.size();
  for (double v : values) ++h.bins[static_cast<long>(std::floor(v / width))];
  r.summary[name] = s;
  r.histograms[name] = std::move(h);
  r.values[name] = std::move(values);
}

template <typename P>
QualityReport triangle_report(std::span<const P> points,
                              std::span<const Triangle> triangles, QualityBins bins) {
  std::vector<double> mn, mx, asp;
  mn.reserve(triangles.size());
  mx.reserve(triangles.size());
  asp.reserve(triangles.size());
  for (const auto& t : triangles) {
    const TriQuality q = tri_quality(points[t[0]], points[t[1]], points[t[2]]);
    mn.push_back(q.min_angle);
    mx.push_back(q.max_angle);
    asp.push_back(q.aspect);
  }
  QualityReport r;
  add_metric(r, "min_angle", bins.angle, std::move(mn));
  add_metric(r, "max_angle", bins.angle, std::move(mx));
  add_metric(r, "aspect", bins.aspect, std::move(asp));
  return r;
}

}  // namespace

QualityReport quality_report(std::span<const Point3> points,
                             std::span<const Triangle> triangles, QualityBins bins) {
  return triangle_report(points, triangles, bins);
}

QualityReport quality_report(std::span<const Point2> points,
                             std::span<const Triangle> triangles, QualityBins bins) {
  return triangle_report(points, triangles, bins);
}

QualityReport quality_report(std::span<const Point3> points,
                             std::span<const Tetrahedron> tets, QualityBins bins) {
  std::vector<double> mn, mx, asp;
  for (const auto& t : tets) {
    const TetQuality q =
        tet_quality(points[t[0]], points[t[1]], points[t[2]], points[t[3]]);
    mn.push_back(q.min_dihedral);
    mx.push_back(q.max_dihedral);
    asp.push_back(q.aspect);
  }
  QualityReport r;
  add_metric(r, "min_dihedral", bins.angle, std::move(mn));
  add_metric(r, "max_dihedral", bins.angle, std::move(mx));
  add_metric(r, "aspect", bins.aspect, std::move(asp));
  return r;
}

std::string quality_csv(const QualityReport& report) {
  std::string out = "metric,bin_lo,bin_hi,count\n";
  char buf[160];
  for (const auto& [name, h] : report.histograms)
    for (const auto& [bin, count] : h.bins) {
      std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%zu\n", name.c_str(),
                    static_cast<double>(bin) * h.bin_width,
                    static_cast<double>(bin + 1) * h.bin_width, count);
      out += buf;
    }
  return out;
}

std::string quality_json(const QualityReport& report) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, s] : report.summary)
    j[name] = {{"min", s.min}, {"max", s.max}, {"mean", s.mean}, {"n", s.n}};
  return j.dump(2);
}

}  // namespace mpsmesh
