#include "mpsmesh/network.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

#include "mpsmesh/error.hpp"
#include "mpsmesh/rng.hpp"

namespace mpsmesh {

namespace {

using json = nlohmann::json;

Point3 json_point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3)
    throw Error(ErrorKind::ParseError, where + ": expected [x, y, z]");
  Point3 p;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw Error(ErrorKind::ParseError, where + ": non-numeric coordinate");
    p[i] = j[i].get<double>();
  }
  return p;
}

DFN parse_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::ParseError, "top level must be an object");
  DFN dfn;
  if (!doc.contains("fractures") || !doc["fractures"].is_array())
    throw Error(ErrorKind::ParseError, "missing array 'fractures'");
  for (std::size_t f = 0; f < doc["fractures"].size(); ++f) {
    const auto& loop = doc["fractures"][f];
    if (!loop.is_array())
      throw Error(ErrorKind::ParseError, "fracture " + std::to_string(f) + ": expected a vertex list");
    std::vector<Point3> poly;
    for (std::size_t v = 0; v < loop.size(); ++v)
      poly.push_back(json_point(loop[v], "fracture " + std::to_string(f) + " vertex " + std::to_string(v)));
    dfn.fractures.push_back(std::move(poly));
  }
  if (doc.contains("intersections")) {
    const auto& arr = doc["intersections"];
    if (!arr.is_array()) throw Error(ErrorKind::ParseError, "'intersections' must be an array");
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const auto& e = arr[k];
      const std::string where = "intersection " + std::to_string(k);
      if (!e.is_object() || !e.contains("i") || !e.contains("j") || !e.contains("p1") ||
          !e.contains("p2") || !e["i"].is_number_integer() || !e["j"].is_number_integer())
        throw Error(ErrorKind::ParseError, where + ": expected {i, j, p1, p2}");
      const auto i = e["i"].get<std::int64_t>(), j = e["j"].get<std::int64_t>();
      if (i < 0 || j < 0) throw Error(ErrorKind::ValidationError, where + ": negative fracture index");
      dfn.intersections.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                                   json_point(e["p1"], where + " p1"),
                                   json_point(e["p2"], where + " p2")});
    }
  }
  if (!doc.contains("domain") || !doc["domain"].is_object() || !doc["domain"].contains("min") ||
      !doc["domain"].contains("max"))
    throw Error(ErrorKind::ParseError, "missing object 'domain' {min, max}");
  dfn.domain.lo = json_point(doc["domain"]["min"], "domain min");
  dfn.domain.hi = json_point(doc["domain"]["max"], "domain max");
  return dfn;
}

DFN parse_text(const std::string& text) {
  std::istringstream lines(text);
  std::string line;
  DFN dfn;
  bool have_domain = false;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream in(line);
    std::string kw;
    if (!(in >> kw)) continue;
    auto fail = [&](const std::string& what) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": " + what);
    };
    auto point = [&]() {
      Point3 p;
      if (!(in >> p[0] >> p[1] >> p[2])) fail("expected three coordinates");
      return p;
    };
    if (kw == "domain") {
      dfn.domain.lo = point();
      dfn.domain.hi = point();
      have_domain = true;
    } else if (kw == "fracture") {
      long n = 0;
      if (!(in >> n) || n < 0) fail("expected a vertex count");
      std::vector<Point3> poly;
      for (long v = 0; v < n; ++v) poly.push_back(point());
      dfn.fractures.push_back(std::move(poly));
    } else if (kw == "intersection") {
      long i = 0, j = 0;
      if (!(in >> i >> j)) fail("expected fracture indices");
      if (i < 0 || j < 0) fail("negative fracture index");
      IntersectionSpec s{static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), {}, {}};
      s.p1 = point();
      s.p2 = point();
      dfn.intersections.push_back(s);
    } else {
      fail("unknown keyword '" + kw + "'");
    }
    std::string extra;
    if (in >> extra) fail("trailing token '" + extra + "'");
  }
  if (!have_domain) throw Error(ErrorKind::ParseError, "missing 'domain' line");
  return dfn;
}

bool inside_polygon(const Point2& p, std::span<const Point2> poly, double tol) {
  return point_in_polygon(p, poly) || polygon_boundary_distance(p, poly) <= tol;
}

// Closest points of segments [p1,p2] and [q1,q2].
std::pair<Point3, Point3> closest_points(const Point3& p1, const Point3& p2,
                                         const Point3& q1, const Point3& q2) {
  const Point3 d1 = p2 - p1, d2 = q2 - q1, r = p1 - q1;
  const double a = dot(d1, d1), e = dot(d2, d2), f = dot(d2, r);
  const double c = dot(d1, r), b = dot(d1, d2);
  const double denom = a * e - b * b;
  double s = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
  double t = (b * s + f) / e;
  if (t < 0.0) {
    t = 0.0;
    s = std::clamp(-c / a, 0.0, 1.0);
  } else if (t > 1.0) {
    t = 1.0;
    s = std::clamp((b - c) / a, 0.0, 1.0);
  }
  return {p1 + d1 * s, q1 + d2 * t};
}

double line_param(const Point3& p, const Point3& a, const Point3& b) {
  const Point3 d = b - a;
  return dot(p - a, d) / dot(d, d);
}

// Uniform hash grid over 3D points for radius queries.
class PointHash {
 public:
  PointHash(std::span<const Point3> pts, double cell) : pts_(pts), cell_(cell) {
    for (std::uint32_t i = 0; i < pts.size(); ++i) buckets_[key(coord(pts[i]))].push_back(i);
  }

  template <typename Fn>
  void for_each_near(const Point3& p, Fn&& fn) const {
    const auto c = coord(p);
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const auto it = buckets_.find(key({c[0] + dx, c[1] + dy, c[2] + dz}));
          if (it == buckets_.end()) continue;
          for (auto q : it->second) fn(q);
        }
  }

 private:
  std::array<std::int64_t, 3> coord(const Point3& p) const {
    return {static_cast<std::int64_t>(std::floor(p[0] / cell_)),
            static_cast<std::int64_t>(std::floor(p[1] / cell_)),
            static_cast<std::int64_t>(std::floor(p[2] / cell_))};
  }
  static std::uint64_t key(const std::array<std::int64_t, 3>& c) {
    return splitmix64(static_cast<std::uint64_t>(c[0])) ^
           splitmix64(static_cast<std::uint64_t>(c[1]) + 0x1234567ull) * 3 ^
           splitmix64(static_cast<std::uint64_t>(c[2]) + 0x7654321ull) * 7;
  }

  std::span<const Point3> pts_;
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets_;
};

}  // namespace

DFN parse_dfn(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  DFN dfn = (first != std::string::npos && text[first] == '{') ? parse_json(text) : parse_text(text);
  validate_dfn(dfn);
  return dfn;
}

DFN load_dfn(const std::filesystem::path& path) { return parse_dfn(read_file(path)); }

void validate_dfn(const DFN& dfn, double tau_rel) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::ValidationError, what); };
  for (int a = 0; a < 3; ++a)
    if (!(dfn.domain.hi[a] > dfn.domain.lo[a])) fail("domain box is empty");
  const double dom_tol = tau_rel * dfn.domain.diagonal();
  std::vector<PlaneFrame> frames;
  std::vector<std::vector<Point2>> local;
  std::vector<double> tol;
  for (std::size_t f = 0; f < dfn.fractures.size(); ++f) {
    const auto& poly = dfn.fractures[f];
    const std::string where = "fracture " + std::to_string(f);
    if (poly.size() < 3) fail(where + ": fewer than 3 vertices");
    for (const auto& p : poly)
      if (!dfn.domain.contains(p, dom_tol)) fail(where + ": vertex outside the domain box");
    try {
      frames.push_back(build_local_frame(poly, tau_rel));
    } catch (const Error& e) {
      fail(where + ": " + e.what());
    }
    Box3 b = Box3::empty();
    for (const auto& p : poly) b.expand(p);
    tol.push_back(tau_rel * b.diagonal());
    std::vector<Point2> loc;
    for (const auto& p : poly) loc.push_back(frames.back().to_local(p));
    local.push_back(std::move(loc));
  }
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> seen;
  for (std::size_t k = 0; k < dfn.intersections.size(); ++k) {
    const auto& s = dfn.intersections[k];
    const std::string where = "intersection " + std::to_string(k);
    if (s.i >= s.j) fail(where + ": requires i < j");
    if (s.j >= dfn.fractures.size()) fail(where + ": fracture index out of range");
    if (!seen.emplace(std::pair{s.i, s.j}, k).second)
      fail(where + ": duplicate of intersection " + std::to_string(seen[{s.i, s.j}]));
    if (!(distance(s.p1, s.p2) > dom_tol)) fail(where + ": degenerate segment");
    for (auto f : {s.i, s.j}) {
      for (const auto* p : {&s.p1, &s.p2}) {
        const double h = std::fabs(frames[f].height(*p));
        if (h > tol[f])
          fail(where + ": endpoint off the plane of fracture " + std::to_string(f) +
               " (residual " + std::to_string(h) + ")");
        if (!inside_polygon(frames[f].to_local(*p), local[f], tol[f]))
          fail(where + ": endpoint outside fracture " + std::to_string(f));
      }
    }
  }
}

// ---------------------------------------------------------------------------

Decomposition decompose(const DFN& dfn, const RadiusParams& params, std::uint64_t seed) {
  params.validate();
  Decomposition dec;
  const double rho = params.rho_min();
  const double tol = kPlaneTolerance * dfn.domain.diagonal();
  const auto nf = dfn.fractures.size();
  const auto nl = dfn.intersections.size();

  dec.fractures.resize(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    auto& fs = dec.fractures[f];
    fs.frame = build_local_frame(dfn.fractures[f]);
    for (const auto& p : dfn.fractures[f]) fs.pslg.polygon.push_back(fs.frame.to_local(p));
  }
  for (std::uint32_t k = 0; k < nl; ++k) {
    const auto& s = dfn.intersections[k];
    for (auto f : {s.i, s.j}) {
      auto& fs = dec.fractures[f];
      fs.lines.push_back(k);
      fs.pslg.intersections.push_back({fs.frame.to_local(s.p1), fs.frame.to_local(s.p2)});
    }
  }

  // Junctions: points where two intersections on a common fracture meet.
  // Nearby junctions (e.g. the triple point seen from three fractures) are
  // clustered into one node.
  struct Junction {
    Point3 p;
    std::vector<std::uint32_t> lines;
  };
  std::vector<Junction> junctions;
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& ls = dec.fractures[f].lines;
    for (std::size_t x = 0; x < ls.size(); ++x)
      for (std::size_t y = x + 1; y < ls.size(); ++y) {
        const auto& a = dfn.intersections[ls[x]];
        const auto& b = dfn.intersections[ls[y]];
        const auto [pa, pb] = closest_points(a.p1, a.p2, b.p1, b.p2);
        if (distance(pa, pb) > tol) continue;
        const Point3 m = 0.5 * (pa + pb);
        Junction* hit = nullptr;
        for (auto& j : junctions)
          if (distance(j.p, m) <= tol) hit = &j;
        if (!hit) {
          junctions.push_back({m, {}});
          hit = &junctions.back();
        }
        for (auto l : {ls[x], ls[y]})
          if (std::find(hit->lines.begin(), hit->lines.end(), l) == hit->lines.end())
            hit->lines.push_back(l);
      }
  }
  dec.junctions = junctions.size();

  std::int64_t next_key = 0;
  auto new_key = [&](const Point3& p) {
    dec.key_points.push_back(p);
    dec.key_rho.push_back(rho);
    return next_key++;
  };
  std::vector<std::int64_t> junction_key(junctions.size());
  for (std::size_t j = 0; j < junctions.size(); ++j) junction_key[j] = new_key(junctions[j].p);

  // Every line through a junction gets its first node on either side at
  // the same distance `shell` from the junction. Then no such node lies in
  // the diametral circle of another line's first sub-segment, and nodes of
  // different lines beyond the shell keep a distance >= rho, since
  // |a - b|^2 >= 4 s t sin^2(theta / 2) for nodes at distances s, t >= shell.
  const double min_gap = rho * (1.0 + 1e-6);
  std::vector<double> shell(junctions.size(), min_gap);
  for (std::size_t j = 0; j < junctions.size(); ++j) {
    const auto& ls = junctions[j].lines;
    for (std::size_t x = 0; x < ls.size(); ++x)
      for (std::size_t y = x + 1; y < ls.size(); ++y) {
        const auto& a = dfn.intersections[ls[x]];
        const auto& b = dfn.intersections[ls[y]];
        const Point3 u = a.p2 - a.p1, v = b.p2 - b.p1;
        const double c = std::fabs(dot(u, v)) / (norm(u) * norm(v));
        const double half = 0.5 * std::acos(std::min(1.0, c));
        if (half > 0.0) shell[j] = std::max(shell[j], min_gap / (2.0 * std::sin(half)));
      }
  }

  dec.lines.resize(nl);
  for (std::uint32_t k = 0; k < nl; ++k) {
    const auto& s = dfn.intersections[k];
    const double len = distance(s.p1, s.p2);
    struct Fixed {
      double t;
      Point3 p;
      std::int64_t key;
      std::int64_t junction;  // junction index for a junction and its shell nodes
    };
    std::vector<Fixed> fixed;
    for (std::size_t j = 0; j < junctions.size(); ++j)
      if (std::find(junctions[j].lines.begin(), junctions[j].lines.end(), k) !=
          junctions[j].lines.end())
        fixed.push_back({line_param(junctions[j].p, s.p1, s.p2), junctions[j].p, junction_key[j],
                         static_cast<std::int64_t>(j)});
    const std::size_t n_junctions = fixed.size();
    for (std::size_t a = 0; a < n_junctions; ++a) {
      const auto j = static_cast<std::size_t>(fixed[a].junction);
      for (double side : {-1.0, 1.0}) {
        const double t = fixed[a].t + side * shell[j] / len;
        // Keep clear of the endpoints and of the other fixed nodes.
        bool room = t * len >= min_gap && (1.0 - t) * len >= min_gap;
        for (std::size_t b = 0; b < fixed.size() && room; ++b)
          if (b != a && std::fabs(fixed[b].t - t) * len < min_gap) room = false;
        if (room) fixed.push_back({t, s.p1 + (s.p2 - s.p1) * t, -1, fixed[a].junction});
      }
    }
    // Endpoints unless a junction sits on them.
    for (auto [t, p] : {std::pair{0.0, s.p1}, std::pair{1.0, s.p2}}) {
      const bool taken = std::any_of(fixed.begin(), fixed.end(), [&](const Fixed& f) {
        return std::fabs(f.t - t) * len <= tol;
      });
      if (!taken) fixed.push_back({t, p, -1, -1});
    }
    std::sort(fixed.begin(), fixed.end(), [](const Fixed& a, const Fixed& b) { return a.t < b.t; });
    for (auto& f : fixed)
      if (f.key < 0) f.key = new_key(f.p);

    auto& line = dec.lines[k];
    line.i = s.i;
    line.j = s.j;
    Rng rng(hash_seed({seed, s.i, s.j}));
    for (std::size_t a = 0; a < fixed.size(); ++a) {
      line.nodes.push_back(fixed[a].p);
      line.keys.push_back(fixed[a].key);
      line.fixed.push_back(true);
      if (a + 1 == fixed.size()) break;
      // A junction and its shell node stay one sub-segment.
      if (fixed[a].junction >= 0 && fixed[a].junction == fixed[a + 1].junction) continue;
      const std::array<Point3, 2> piece = {fixed[a].p, fixed[a + 1].p};
      std::vector<Point3> inner;
      try {
        inner = sample_polyline_1d<3>(piece, [rho](const Point3&) { return rho; }, params.a, rng);
      } catch (const Error& e) {
        throw Error(e.kind(), "intersection " + std::to_string(k) + " (" + std::to_string(s.i) +
                                  ", " + std::to_string(s.j) + "): " + e.what());
      }
      for (const auto& q : inner) {
        line.nodes.push_back(q);
        line.keys.push_back(new_key(q));
        line.fixed.push_back(false);
      }
    }
  }

  // Nodes of different intersections closer than rho (near junctions with a
  // small crossing angle): drop the free node of the higher line.
  {
    std::vector<Point3> pts;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> where;
    std::vector<std::size_t> offset(nl);
    for (std::uint32_t k = 0; k < nl; ++k)
    {
      offset[k] = pts.size();
      for (std::uint32_t n = 0; n < dec.lines[k].nodes.size(); ++n) {
        pts.push_back(dec.lines[k].nodes[n]);
        where.push_back({k, n});
      }
    }
    std::vector<char> dead(pts.size(), 0);
    PointHash hash(pts, rho);
    for (std::uint32_t a = 0; a < pts.size(); ++a) {
      if (dead[a]) continue;
      hash.for_each_near(pts[a], [&](std::uint32_t b) {
        if (b <= a || dead[a] || dead[b]) return;
        const auto [la, na] = where[a];
        const auto [lb, nb] = where[b];
        if (la == lb) return;
        if (dec.lines[la].keys[na] == dec.lines[lb].keys[nb]) return;
        if (!(distance(pts[a], pts[b]) < rho)) return;
        const bool fa = dec.lines[la].fixed[na], fb = dec.lines[lb].fixed[nb];
        if (fa && fb) return;
        const std::uint32_t loser = fb ? a : (fa ? b : (la > lb ? a : b));
        dead[loser] = 1;
        ++dec.line_conflicts_removed;
      });
    }
    if (dec.line_conflicts_removed > 0) {
      for (std::uint32_t k = 0; k < nl; ++k) {
        auto& line = dec.lines[k];
        SharedLine kept{line.i, line.j, {}, {}, {}};
        for (std::uint32_t n = 0; n < line.nodes.size(); ++n) {
          if (dead[offset[k] + n]) continue;
          kept.nodes.push_back(line.nodes[n]);
          kept.keys.push_back(line.keys[n]);
          kept.fixed.push_back(line.fixed[n]);
        }
        line = std::move(kept);
      }
    }
  }

  for (std::size_t f = 0; f < nf; ++f) {
    auto& fs = dec.fractures[f];
    std::vector<std::int64_t> used;
    for (auto k : fs.lines) {
      const auto& line = dec.lines[k];
      for (std::size_t n = 0; n < line.nodes.size(); ++n) {
        if (std::find(used.begin(), used.end(), line.keys[n]) != used.end()) continue;
        used.push_back(line.keys[n]);
        fs.fixed.push_back({fs.frame.to_local(line.nodes[n]), rho, Tag::intersection, line.keys[n]});
      }
    }
  }
  return dec;
}

Sample3 to_world(const Sample2& local, const FractureSetup& setup, const Decomposition& dec) {
  Sample3 out;
  out.rng_seed = local.rng_seed;
  for (std::size_t i = 0; i < local.size(); ++i) {
    const auto key = local.keys[i];
    const Point3 p = key >= 0 ? dec.key_points[static_cast<std::size_t>(key)]
                              : setup.frame.to_world(local.points[i]);
    out.push(p, local.rho[i], local.tags[i], key);
  }
  return out;
}

MergedSample merge_samples(std::span<const Sample3> per_fracture) {
  MergedSample m;
  std::unordered_map<std::int64_t, std::size_t> by_key;
  double max_rho = 0.0;
  for (std::size_t f = 0; f < per_fracture.size(); ++f) {
    const auto& s = per_fracture[f];
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s.keys[i] >= 0) {
        if (by_key.count(s.keys[i])) {
          ++m.duplicates;
          continue;
        }
        by_key[s.keys[i]] = m.sample.size();
      }
      m.sample.push(s.points[i], s.rho[i], s.tags[i], s.keys[i]);
      m.fracture.push_back(static_cast<std::int32_t>(f));
      m.source.push_back(static_cast<std::uint32_t>(i));
      max_rho = std::fmax(max_rho, s.rho[i]);
    }
  }
  if (m.sample.size() == 0) return m;

  const auto& pts = m.sample.points;
  std::vector<char> dead(pts.size(), 0);
  PointHash hash(pts, max_rho);
  for (std::uint32_t a = 0; a < pts.size(); ++a) {
    if (dead[a]) continue;
    hash.for_each_near(pts[a], [&](std::uint32_t b) {
      if (b <= a || dead[a] || dead[b]) return;
      if (m.fracture[a] == m.fracture[b]) return;
      const double r = std::fmin(m.sample.rho[a], m.sample.rho[b]);
      if (!(distance2(pts[a], pts[b]) < r * r)) return;
      const bool ia = m.sample.tags[a] == Tag::intersection;
      const bool ib = m.sample.tags[b] == Tag::intersection;
      if (ia && ib) {
        ++m.conflicts_unresolved;
        return;
      }
      std::uint32_t loser;
      if (ia != ib)
        loser = ia ? b : a;
      else
        loser = m.fracture[a] > m.fracture[b] ? a : b;
      dead[loser] = 1;
      ++m.conflicts_removed;
    });
  }
  if (m.conflicts_removed == 0) return m;
  MergedSample out;
  out.sample.rng_seed = m.sample.rng_seed;
  out.duplicates = m.duplicates;
  out.conflicts_removed = m.conflicts_removed;
  out.conflicts_unresolved = m.conflicts_unresolved;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (dead[i]) continue;
    out.sample.push(pts[i], m.sample.rho[i], m.sample.tags[i], m.sample.keys[i]);
    out.fracture.push_back(m.fracture[i]);
    out.source.push_back(m.source[i]);
  }
  return out;
}

std::vector<Edge> fracture_subsegments(const Sample2& local, const Decomposition& dec,
                                       std::size_t f, std::size_t* missing) {
  std::unordered_map<std::int64_t, std::uint32_t> index;
  for (std::uint32_t i = 0; i < local.size(); ++i)
    if (local.keys[i] >= 0) index.emplace(local.keys[i], i);
  std::vector<Edge> out;
  std::size_t lost = 0;
  for (auto k : dec.fractures[f].lines) {
    const auto& line = dec.lines[k];
    std::int64_t prev = -1;
    for (auto key : line.keys) {
      const auto it = index.find(key);
      if (it == index.end()) {
        ++lost;
        continue;
      }
      if (prev >= 0) out.push_back({static_cast<std::uint32_t>(prev), it->second});
      prev = it->second;
    }
  }
  if (missing) *missing = lost;
  return out;
}

// ---------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::IoError, "read failed: " + path.string());
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << data;
  out.close();
  if (!out) throw Error(ErrorKind::IoError, "write failed: " + path.string());
}

namespace {

void append(std::string& s, const char* fmt, auto... args) {
  char buf[128];
  const int n = std::snprintf(buf, sizeof buf, fmt, args...);
  s.append(buf, static_cast<std::size_t>(n));
}

}  // namespace

std::string vtk_string(std::span<const Point3> points,
                       const std::vector<std::vector<std::uint32_t>>& cells) {
  std::string s = "# vtk DataFile Version 3.0\nmpsmesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  append(s, "POINTS %zu double\n", points.size());
  for (const auto& p : points) append(s, "%.17g %.17g %.17g\n", p[0], p[1], p[2]);
  std::size_t total = 0;
  for (const auto& c : cells) total += c.size() + 1;
  append(s, "CELLS %zu %zu\n", cells.size(), total);
  for (const auto& c : cells) {
    append(s, "%zu", c.size());
    for (auto v : c) append(s, " %u", v);
    s += '\n';
  }
  append(s, "CELL_TYPES %zu\n", cells.size());
  for (const auto& c : cells) append(s, "%d\n", c.size() == 3 ? 5 : 10);
  append(s, "CELL_DATA %zu\nSCALARS max_edge_length double 1\nLOOKUP_TABLE default\n", cells.size());
  for (const auto& c : cells) {
    double m = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = i + 1; j < c.size(); ++j)
        m = std::fmax(m, distance(points[c[i]], points[c[j]]));
    append(s, "%.17g\n", m);
  }
  return s;
}

void export_vtk(const std::filesystem::path& path, std::span<const Point3> points,
                std::span<const Triangle> triangles) {
  std::vector<std::vector<std::uint32_t>> cells;
  cells.reserve(triangles.size());
  for (const auto& t : triangles) cells.push_back({t.begin(), t.end()});
  write_file(path, vtk_string(points, cells));
}

void export_vtk(const std::filesystem::path& path, std::span<const Point3> points,
                std::span<const Tetrahedron> tets) {
  std::vector<std::vector<std::uint32_t>> cells;
  cells.reserve(tets.size());
  for (const auto& t : tets) cells.push_back({t.begin(), t.end()});
  write_file(path, vtk_string(points, cells));
}

VtkMesh parse_vtk(const std::string& text) {
  std::istringstream in(text);
  auto fail = [](const std::string& what) { throw Error(ErrorKind::ParseError, "VTK: " + what); };
  std::string line;
  if (!std::getline(in, line) || line.rfind("# vtk DataFile", 0) != 0) fail("missing header");
  std::getline(in, line);  // title
  if (!std::getline(in, line) || line.rfind("ASCII", 0) != 0) fail("only ASCII files are supported");
  std::string word;
  if (!(in >> word >> line) || word != "DATASET" || line != "UNSTRUCTURED_GRID")
    fail("expected DATASET UNSTRUCTURED_GRID");

  VtkMesh m;
  auto count = [&](const char* kw) {
    long long n = -1;
    if (!(in >> word) || word != kw || !(in >> n) || n < 0) fail(std::string("expected ") + kw);
    return static_cast<std::size_t>(n);
  };
  const auto np = count("POINTS");
  in >> word;  // data type
  m.points.resize(np);
  for (auto& p : m.points)
    if (!(in >> p[0] >> p[1] >> p[2])) fail("truncated POINTS");
  const auto nc = count("CELLS");
  long long total = 0;
  if (!(in >> total)) fail("bad CELLS header");
  long long seen = 0;
  for (std::size_t c = 0; c < nc; ++c) {
    long long k = 0;
    if (!(in >> k) || k < 1 || k > 8) fail("bad cell size");
    std::vector<std::uint32_t> cell(static_cast<std::size_t>(k));
    for (auto& v : cell) {
      long long id = -1;
      if (!(in >> id) || id < 0 || static_cast<std::size_t>(id) >= np) fail("bad point index");
      v = static_cast<std::uint32_t>(id);
    }
    seen += k + 1;
    m.cells.push_back(std::move(cell));
  }
  if (seen != total) fail("CELLS size mismatch");
  if (count("CELL_TYPES") != nc) fail("CELL_TYPES count mismatch");
  for (std::size_t c = 0; c < nc; ++c) {
    int t = 0;
    if (!(in >> t)) fail("truncated CELL_TYPES");
    if (!((t == 5 && m.cells[c].size() == 3) || (t == 10 && m.cells[c].size() == 4)))
      fail("unsupported cell type " + std::to_string(t));
    m.types.push_back(t);
  }
  if (in >> word) {
    if (word != "CELL_DATA") fail("unexpected section " + word);
    long long n = 0;
    if (!(in >> n) || static_cast<std::size_t>(n) != nc) fail("CELL_DATA count mismatch");
    std::string name, type;
    if (!(in >> word >> name >> type) || word != "SCALARS") fail("expected SCALARS");
    std::getline(in, line);
    if (!(in >> word >> line) || word != "LOOKUP_TABLE") fail("expected LOOKUP_TABLE");
    for (std::size_t c = 0; c < nc; ++c) {
      double v = 0.0;
      if (!(in >> v)) fail("truncated CELL_DATA");
      if (name == "max_edge_length") m.max_edge_length.push_back(v);
    }
  }
  return m;
}

VtkMesh load_vtk(const std::filesystem::path& path) { return parse_vtk(read_file(path)); }

std::string points_csv(const Sample3& sample) {
  std::string s = "x,y,z,rho,tag\n";
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const auto& p = sample.points[i];
    append(s, "%.17g,%.17g,%.17g,%.17g,", p[0], p[1], p[2], sample.rho[i]);
    s += to_string(sample.tags[i]);
    s += '\n';
  }
  return s;
}

Sample3 parse_points_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,y,z,rho,tag", 0) != 0)
    throw Error(ErrorKind::ParseError, "points CSV: missing header");
  Sample3 out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<double, 4> v{};
    std::size_t pos = 0;
    for (int i = 0; i < 4; ++i) {
      const auto comma = line.find(',', pos);
      if (comma == std::string::npos)
        throw Error(ErrorKind::ParseError, "points CSV line " + std::to_string(lineno));
      const char* b = line.data() + pos;
      const auto [ptr, ec] = std::from_chars(b, line.data() + comma, v[i]);
      if (ec != std::errc() || ptr != line.data() + comma)
        throw Error(ErrorKind::ParseError, "points CSV line " + std::to_string(lineno));
      pos = comma + 1;
    }
    out.push({v[0], v[1], v[2]}, v[3], tag_from_string(line.substr(pos)));
  }
  return out;
}

void export_points_csv(const std::filesystem::path& path, const Sample3& sample) {
  write_file(path, points_csv(sample));
}

}  // namespace mpsmesh
