#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "mpsmesh/vec.hpp"

namespace mpsmesh {

enum class Tag : std::uint8_t {
  polygon_vertex,
  boundary,
  intersection,
  interior,
  matrix_boundary,
  volume,
};

std::string_view to_string(Tag tag);
Tag tag_from_string(std::string_view s);

// Accepted node set. `key` links a node to a network-wide shared node
// (intersection or box-edge samplings); -1 when the node is local.
template <int D>
struct Sample {
  std::vector<Vec<D>> points;
  std::vector<double> rho;
  std::vector<Tag> tags;
  std::vector<std::int64_t> keys;
  std::uint64_t rng_seed = 0;

  std::size_t size() const { return points.size(); }
  void push(const Vec<D>& p, double r, Tag t, std::int64_t key = -1) {
    points.push_back(p);
    rho.push_back(r);
    tags.push_back(t);
    keys.push_back(key);
  }
};

using Sample2 = Sample<2>;
using Sample3 = Sample<3>;

// Index pairs (i, j) with |x_i - x_j| < min(rho_i, rho_j), by brute force.
template <int D>
std::vector<std::pair<std::size_t, std::size_t>> empty_disk_violations(
    const Sample<D>& s) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      const double r = s.rho[i] < s.rho[j] ? s.rho[i] : s.rho[j];
      if (distance2(s.points[i], s.points[j]) < r * r) out.emplace_back(i, j);
    }
  return out;
}

}  // namespace mpsmesh
