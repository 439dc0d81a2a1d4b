#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "mpsmesh/accel_grid.hpp"

using namespace mpsmesh;
using doctest::Approx;

TEST_CASE("grid geometry sizing") {
  auto g = make_grid_geometry(Box2{{0, 0}, {1, 1}}, 0.01);
  CHECK(g.cell_side == Approx(0.01 / (2 * std::sqrt(2.0))));
  CHECK(g.dims[0] == 283);
  CHECK(g.dims[1] == 283);
  CHECK(g.cell_diameter() <= 0.005 + 1e-15);

  auto g3 = make_grid_geometry(Box3{{0, 0, 0}, {1, 1, 1}}, 1.0);
  CHECK(g3.cell_side == Approx(1 / (2 * std::sqrt(3.0))));

  auto tiny = make_grid_geometry(Box2{{0, 0}, {0.001, 0.001}}, 1.0);
  CHECK(tiny.dims[0] == 1);
  CHECK(tiny.dims[1] == 1);
  CHECK_THROWS(make_grid_geometry(Box2{{0, 0}, {1, 1}}, 0.0));
}

TEST_CASE("N+ contains the adjacent cells and is bounded") {
  auto g = make_grid_geometry(Box2{{0, 0}, {1, 1}}, 0.05);
  AccelGrid<2> grid(g);
  const Point2 x{0.5, 0.5};
  const auto home = g.coord_of(x);
  auto plus = grid.neighbors_plus(x, g.cell_side);
  std::set<CellIndex> s(plus.begin(), plus.end());
  // Point-to-cell distance: edge neighbours are always within one side;
  // diagonal ones only when x sits close enough to the shared corner.
  for (int dj = -1; dj <= 1; ++dj)
    for (int di = -1; di <= 1; ++di) {
      const CellCoord<2> c{home[0] + di, home[1] + dj};
      const bool listed = s.count(g.index_of(c)) == 1;
      if (di == 0 || dj == 0) CHECK(listed);
      else CHECK(listed == (g.distance_to_cell(x, c) <= g.cell_side));
    }
  AccelGrid<2> wide(g);
  auto with_diag = wide.neighbors_plus(x, g.cell_diameter());
  CHECK(with_diag.size() >= 9);
  CHECK(plus.size() <= 25);

  auto tiny = grid.neighbors_plus(x, 1e-12);
  CHECK(tiny.size() == 1);
  CHECK(tiny[0] == g.index_of(x));

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (int i = 0; i < 200; ++i) {
    const double rho = 0.2 * u(rng);
    const auto n = grid.neighbors_plus({u(rng), u(rng)}, rho).size();
    const double b = 2 * std::ceil(rho / g.cell_side) + 3;
    CHECK(double(n) <= b * b);
  }
}

TEST_CASE("N+ completeness against brute force") {
  auto g = make_grid_geometry(Box2{{0, 0}, {1, 1}}, 0.02);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 10000; ++t) {
    const Point2 x{u(rng), u(rng)}, y{u(rng) * 0.2 + 0.4, u(rng) * 0.2 + 0.4};
    const double rho = 0.002 + 0.05 * u(rng);
    AccelGrid<2> grid(g);
    if (distance(x, y) < rho) {
      bool found = false;
      grid.for_each_plus(x, rho, [&](CellIndex c) { found |= c == g.index_of(y); });
      CHECK(found);
    }
  }
}

TEST_CASE("N- soundness and shape") {
  const double a = 0.1;
  auto g = make_grid_geometry(Box2{{0, 0}, {1, 1}}, 0.01);
  AccelGrid<2> grid(g);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 10000; ++t) {
    const Point2 x{0.2 + 0.6 * u(rng), 0.2 + 0.6 * u(rng)};
    const double rho = 0.005 + 0.04 * u(rng);
    auto minus = grid.neighbors_minus(x, rho, a);
    if (minus.empty()) continue;
    const CellIndex c = minus[std::size_t(u(rng) * minus.size()) % minus.size()];
    const auto box = g.cell_box(g.coord_of_index(c));
    const Point2 y{box.lo[0] + u(rng) * g.cell_side, box.lo[1] + u(rng) * g.cell_side};
    // Worst-case Lipschitz neighbour radius.
    const double rho_y = rho - a * distance(x, y);
    CHECK(distance(x, y) <= std::fmin(rho, rho_y));
  }

  // A = 0, rho = 4 cell diameters: every listed cell's far corner relative to
  // the far corner of the home cell is within rho (enumeration oracle).
  const Point2 x{0.5, 0.5};
  const double rho = 4 * g.cell_diameter();
  const auto home = g.coord_of(x);
  auto list = grid.neighbors_minus(x, rho, 0.0);
  std::set<CellIndex> got(list.begin(), list.end());
  for (auto j = home[1] - 12; j <= home[1] + 12; ++j)
    for (auto i = home[0] - 12; i <= home[0] + 12; ++i) {
      const auto bh = g.cell_box(home);
      const auto bc = g.cell_box({i, j});
      const double dx = std::fmax(bh.hi[0], bc.hi[0]) - std::fmin(bh.lo[0], bc.lo[0]);
      const double dy = std::fmax(bh.hi[1], bc.hi[1]) - std::fmin(bh.lo[1], bc.lo[1]);
      const bool expect = std::sqrt(dx * dx + dy * dy) <= rho * (1 + 1e-12);
      CHECK(expect == (got.count(g.index_of(CellCoord<2>{i, j})) == 1));
    }

  CHECK(grid.neighbors_minus(x, 0.5 * g.cell_diameter(), a).empty());
}

TEST_CASE("occupied bookkeeping") {
  auto g = make_grid_geometry(Box2{{0, 0}, {1, 1}}, 0.1);
  AccelGrid<2> grid(g);
  CellBits domain(g.cell_count());
  for (CellIndex c = 0; c < g.cell_count(); ++c) domain.set(c);
  CHECK(grid.unmarked_cells(domain).size() == g.cell_count());
  const Point2 x{0.5, 0.5};
  const auto before = grid.unmarked_cells(domain).size();
  const auto minus = grid.neighbors_minus(x, 0.2, 0.1);
  grid.mark_occupied(x, 0.2, 0.1);
  CHECK(grid.unmarked_cells(domain).size() == before - minus.size());
  CHECK(grid.is_blocked(g.index_of(x)));

  grid.insert_node(g.index_of(x), 7);
  CHECK(grid.node_at(g.index_of(x)).value() == 7);
  CHECK_THROWS_AS(grid.insert_node(g.index_of(x), 8), std::logic_error);
}

TEST_CASE("node scan over N+ equals the cell-wise scan") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  auto g = make_grid_geometry(Box3{{0, 0, 0}, {1, 1, 1}}, 0.05);
  AccelGrid<3> grid(g);
  std::uint32_t id = 0;
  for (int i = 0; i < 3000; ++i) {
    const Point3 p{u(rng), u(rng), u(rng)};
    if (!grid.has_node(g.index_of(p))) grid.insert_node(g.index_of(p), id++);
  }
  for (int t = 0; t < 500; ++t) {
    const Point3 x{u(rng), u(rng), u(rng)};
    const double rho = 0.2 * u(rng);
    std::set<std::uint32_t> a, b;
    grid.for_each_plus(x, rho, [&](CellIndex c) {
      if (auto n = grid.node_at(c)) a.insert(*n);
    });
    grid.for_each_node_plus(x, rho, [&](std::uint32_t n) {
      b.insert(n);
      return false;
    });
    // The row scan may add boundary-touching cells, never drop one.
    for (auto n : a) CHECK(b.count(n) == 1);
    CHECK(b.size() <= a.size() + 8);
  }
}
