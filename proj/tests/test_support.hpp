#pragma once

// Random generators and brute-force oracles shared by the test suites.
// Oracles here deliberately avoid the library's kernels and morphology.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "ivos/raster.hpp"

namespace ivos::testing {

inline BinaryMask random_mask(std::mt19937_64& rng, RasterSize size, double density) {
  std::bernoulli_distribution coin(density);
  BinaryMask m(size);
  for (auto& b : m.bits) b = coin(rng) ? 1 : 0;
  return m;
}

/// Blobby masks: a few random filled rectangles and disks.
inline BinaryMask random_blobs(std::mt19937_64& rng, RasterSize size, int count) {
  BinaryMask m(size);
  std::uniform_int_distribution<int> ux(0, size.width - 1);
  std::uniform_int_distribution<int> uy(0, size.height - 1);
  std::uniform_int_distribution<int> ur(1, std::max(1, std::min(size.width, size.height) / 4));
  std::bernoulli_distribution disk(0.5);
  for (int i = 0; i < count; ++i) {
    const int cx = ux(rng);
    const int cy = uy(rng);
    const int rx = ur(rng);
    const int ry = ur(rng);
    const bool round = disk(rng);
    for (int y = 0; y < size.height; ++y) {
      for (int x = 0; x < size.width; ++x) {
        const double dx = static_cast<double>(x - cx) / rx;
        const double dy = static_cast<double>(y - cy) / ry;
        const bool in = round ? dx * dx + dy * dy <= 1.0 : std::abs(x - cx) <= rx && std::abs(y - cy) <= ry;
        if (in) m.set(x, y);
      }
    }
  }
  return m;
}

inline LabelMask random_labels(std::mt19937_64& rng, RasterSize size, int max_label) {
  std::uniform_int_distribution<int> ul(0, max_label);
  LabelMask m(size);
  for (auto& v : m.labels) v = static_cast<std::uint8_t>(ul(rng));
  return m;
}

/// Label map built from blobs, later objects painted over earlier ones.
inline LabelMask random_blob_labels(std::mt19937_64& rng, RasterSize size, int objects) {
  LabelMask m(size);
  for (int k = 1; k <= objects; ++k) {
    const BinaryMask b = random_blobs(rng, size, 2);
    for (std::size_t i = 0; i < b.bits.size(); ++i) {
      if (b.bits[i]) m.labels[i] = static_cast<std::uint8_t>(k);
    }
  }
  return m;
}

inline std::size_t oracle_count(const BinaryMask& m) {
  std::size_t n = 0;
  for (int y = 0; y < m.size.height; ++y)
    for (int x = 0; x < m.size.width; ++x) n += m.at(x, y) ? 1 : 0;
  return n;
}

/// Per-pixel max over disk offsets (Minkowski sum by definition).
inline BinaryMask oracle_dilate_disk(const BinaryMask& m, int r) {
  BinaryMask out(m.size);
  for (int y = 0; y < m.size.height; ++y) {
    for (int x = 0; x < m.size.width; ++x) {
      bool v = false;
      for (int dy = -r; dy <= r && !v; ++dy) {
        for (int dx = -r; dx <= r && !v; ++dx) {
          if (dx * dx + dy * dy > r * r) continue;
          const int sx = x - dx;
          const int sy = y - dy;
          if (m.size.contains(sx, sy) && m.at(sx, sy)) v = true;
        }
      }
      out.set(x, y, v);
    }
  }
  return out;
}

inline BinaryMask oracle_boundary(const BinaryMask& m) {
  BinaryMask out(m.size);
  auto fg = [&](int x, int y) { return m.size.contains(x, y) && m.at(x, y); };
  for (int y = 0; y < m.size.height; ++y) {
    for (int x = 0; x < m.size.width; ++x) {
      if (!fg(x, y)) continue;
      if (!fg(x - 1, y) || !fg(x + 1, y) || !fg(x, y - 1) || !fg(x, y + 1)) out.set(x, y);
    }
  }
  return out;
}

/// Number of connected components by recursive flood fill.
inline int oracle_component_count(const BinaryMask& m, bool eight) {
  std::vector<int> seen(m.size.area(), 0);
  int count = 0;
  std::function<void(int, int)> fill = [&](int x, int y) {
    if (!m.size.contains(x, y) || !m.at(x, y) || seen[m.size.index(x, y)]) return;
    seen[m.size.index(x, y)] = 1;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        if (!eight && dx != 0 && dy != 0) continue;
        fill(x + dx, y + dy);
      }
  };
  for (int y = 0; y < m.size.height; ++y)
    for (int x = 0; x < m.size.width; ++x)
      if (m.at(x, y) && !seen[m.size.index(x, y)]) {
        ++count;
        fill(x, y);
      }
  return count;
}

inline bool has_full_2x2(const BinaryMask& m) {
  for (int y = 0; y + 1 < m.size.height; ++y)
    for (int x = 0; x + 1 < m.size.width; ++x)
      if (m.at(x, y) && m.at(x + 1, y) && m.at(x, y + 1) && m.at(x + 1, y + 1)) return true;
  return false;
}

/// Longest simple path (in nodes) in the 8-adjacency graph of the mask's
/// pixels, by exhaustive enumeration from every start pixel.
inline std::size_t oracle_longest_simple_path(const BinaryMask& m) {
  std::vector<std::pair<int, int>> nodes;
  for (int y = 0; y < m.size.height; ++y)
    for (int x = 0; x < m.size.width; ++x)
      if (m.at(x, y)) nodes.emplace_back(x, y);
  const std::size_t n = nodes.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && std::abs(nodes[i].first - nodes[j].first) <= 1 &&
          std::abs(nodes[i].second - nodes[j].second) <= 1)
        adj[i].push_back(j);
  std::size_t best = 0;
  std::vector<char> used(n, 0);
  std::function<void(std::size_t, std::size_t)> walk = [&](std::size_t u, std::size_t len) {
    best = std::max(best, len);
    for (const std::size_t v : adj[u]) {
      if (used[v]) continue;
      used[v] = 1;
      walk(v, len + 1);
      used[v] = 0;
    }
  };
  for (std::size_t s = 0; s < n; ++s) {
    used[s] = 1;
    walk(s, 1);
    used[s] = 0;
  }
  return best;
}

}  // namespace ivos::testing
