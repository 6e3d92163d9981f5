#include "ivos/mask_ops.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <deque>
#include <numeric>
#include <string>

#include "ivos/simd/kernels.hpp"

namespace ivos {

BinaryMask extract_object(const LabelMask& mask, ObjectId id) {
  BinaryMask out(mask.size);
  simd::active().equal_u8(out.bits.data(), mask.labels.data(), id, out.bits.size());
  return out;
}

std::vector<Component> connected_components(const BinaryMask& mask, Connectivity conn) {
  const RasterSize size = mask.size;
  std::vector<int> label(size.area(), -1);
  std::vector<Component> comps;
  std::deque<Pixel> queue;

  static constexpr std::array<Pixel, 8> kN8{{{-1, -1}, {0, -1}, {1, -1}, {-1, 0},
                                             {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};
  static constexpr std::array<Pixel, 4> kN4{{{0, -1}, {-1, 0}, {1, 0}, {0, 1}}};
  const std::span<const Pixel> nbrs = conn == Connectivity::eight
                                          ? std::span<const Pixel>(kN8)
                                          : std::span<const Pixel>(kN4);

  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) {
      const std::size_t idx = size.index(x, y);
      if (!mask.bits[idx] || label[idx] >= 0) continue;
      const int id = static_cast<int>(comps.size());
      Component c{BinaryMask(size), 0, idx};
      label[idx] = id;
      queue.push_back({x, y});
      while (!queue.empty()) {
        const Pixel p = queue.front();
        queue.pop_front();
        c.mask.bits[size.index(p.x, p.y)] = 1;
        ++c.area;
        for (const Pixel d : nbrs) {
          const int nx = p.x + d.x;
          const int ny = p.y + d.y;
          if (!size.contains(nx, ny)) continue;
          const std::size_t ni = size.index(nx, ny);
          if (mask.bits[ni] && label[ni] < 0) {
            label[ni] = id;
            queue.push_back({nx, ny});
          }
        }
      }
      comps.push_back(std::move(c));
    }
  }
  std::stable_sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
    if (a.area != b.area) return a.area > b.area;
    return a.first_index < b.first_index;
  });
  return comps;
}

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se) {
  if (se.radius == 0) return mask;
  const auto& k = simd::active();
  const RasterSize size = mask.size;
  const auto w = static_cast<std::size_t>(size.width);

  // Horizontal dilations by [-hw, hw] for every half-width the element uses.
  const int max_hw = se.half_width(0);
  std::vector<std::vector<std::uint8_t>> horiz(static_cast<std::size_t>(max_hw) + 1);
  horiz[0] = mask.bits;
  for (int hw = 1; hw <= max_hw; ++hw) {
    auto& cur = horiz[static_cast<std::size_t>(hw)];
    cur = horiz[static_cast<std::size_t>(hw) - 1];
    const auto shift = static_cast<std::size_t>(hw);
    if (shift >= w) continue;
    for (int y = 0; y < size.height; ++y) {
      const std::size_t row = static_cast<std::size_t>(y) * w;
      k.or_into(cur.data() + row + shift, mask.bits.data() + row, w - shift);
      k.or_into(cur.data() + row, mask.bits.data() + row + shift, w - shift);
    }
  }

  BinaryMask out(size);
  for (int dy = -se.radius; dy <= se.radius; ++dy) {
    const int hw = se.half_width(dy);
    if (hw < 0) continue;
    const auto& src = horiz[static_cast<std::size_t>(hw)];
    for (int y = 0; y < size.height; ++y) {
      const int sy = y - dy;
      if (sy < 0 || sy >= size.height) continue;
      k.or_into(out.bits.data() + static_cast<std::size_t>(y) * w,
                src.data() + static_cast<std::size_t>(sy) * w, w);
    }
  }
  return out;
}

namespace {

// Neighbour order x1..x8: E, NE, N, NW, W, SW, S, SE.
constexpr std::array<Pixel, 8> kRing{{{1, 0}, {1, -1}, {0, -1}, {-1, -1},
                                      {-1, 0}, {-1, 1}, {0, 1}, {1, 1}}};

unsigned neighbourhood_code(const std::vector<std::uint8_t>& bits, RasterSize size, int x, int y) {
  unsigned code = 0;
  for (unsigned k = 0; k < 8; ++k) {
    const int nx = x + kRing[k].x;
    const int ny = y + kRing[k].y;
    if (size.contains(nx, ny) && bits[size.index(nx, ny)]) code |= 1u << k;
  }
  return code;
}

// Yokoi connectivity number for 8-connected foreground equals one exactly
// when the centre pixel is simple.
std::array<bool, 256> build_simple_table() {
  std::array<bool, 256> table{};
  for (unsigned code = 0; code < 256; ++code) {
    auto bg = [code](unsigned k) { return ((code >> (k % 8)) & 1u) ? 0 : 1; };
    int n = 0;
    for (unsigned k : {0u, 2u, 4u, 6u}) n += bg(k) - bg(k) * bg(k + 1) * bg(k + 2);
    table[code] = n == 1;
  }
  return table;
}

const std::array<bool, 256>& simple_table() {
  static const std::array<bool, 256> table = build_simple_table();
  return table;
}

// True when the foreground neighbours form a single 8-connected group inside
// the ring, so removing the centre cannot split a component. Holes may merge.
std::array<bool, 256> build_fg_joinable_table() {
  std::array<bool, 256> table{};
  for (unsigned code = 0; code < 256; ++code) {
    std::array<int, 8> group{};
    group.fill(-1);
    int groups = 0;
    for (unsigned s = 0; s < 8; ++s) {
      if (!((code >> s) & 1u) || group[s] >= 0) continue;
      std::array<unsigned, 8> stack{};
      std::size_t top = 0;
      stack[top++] = s;
      group[s] = groups;
      while (top > 0) {
        const unsigned u = stack[--top];
        for (unsigned v = 0; v < 8; ++v) {
          if (!((code >> v) & 1u) || group[v] >= 0) continue;
          if (std::abs(kRing[u].x - kRing[v].x) <= 1 && std::abs(kRing[u].y - kRing[v].y) <= 1) {
            group[v] = groups;
            stack[top++] = v;
          }
        }
      }
      ++groups;
    }
    table[code] = groups == 1;
  }
  return table;
}

const std::array<bool, 256>& fg_joinable_table() {
  static const std::array<bool, 256> table = build_fg_joinable_table();
  return table;
}

// Pixels of p's 8-connected component that lose their connection to
// `anchor` once p is removed.
std::vector<std::size_t> detached_after_removal(const std::vector<std::uint8_t>& bits, RasterSize size, Pixel p,
                                                Pixel anchor) {
  auto flood = [&](Pixel start, Pixel blocked) {
    std::vector<std::uint8_t> seen(bits.size(), 0);
    std::vector<Pixel> stack{start};
    seen[size.index(start.x, start.y)] = 1;
    if (blocked.x >= 0) seen[size.index(blocked.x, blocked.y)] = 1;
    while (!stack.empty()) {
      const Pixel u = stack.back();
      stack.pop_back();
      for (const Pixel d : kRing) {
        const int nx = u.x + d.x;
        const int ny = u.y + d.y;
        if (!size.contains(nx, ny)) continue;
        const std::size_t ni = size.index(nx, ny);
        if (bits[ni] && !seen[ni]) {
          seen[ni] = 1;
          stack.push_back({nx, ny});
        }
      }
    }
    if (blocked.x >= 0) seen[size.index(blocked.x, blocked.y)] = 0;
    return seen;
  };
  const auto whole = flood(p, {-1, -1});
  const auto kept = flood(anchor, p);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (whole[i] && !kept[i] && i != size.index(p.x, p.y)) out.push_back(i);
  }
  return out;
}

}  // namespace

BinaryMask skeletonize(const BinaryMask& mask) {
  const RasterSize size = mask.size;
  std::vector<std::uint8_t> bits = mask.bits;
  const auto& simple = simple_table();

  // N, S, E, W border directions.
  static constexpr std::array<Pixel, 4> kDirs{{{0, -1}, {0, 1}, {1, 0}, {-1, 0}}};
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Pixel d : kDirs) {
      // Border pixels are fixed at the start of the sub-pass; simplicity is
      // re-checked against the current state before each deletion.
      std::vector<Pixel> candidates;
      for (int y = 0; y < size.height; ++y) {
        for (int x = 0; x < size.width; ++x) {
          if (!bits[size.index(x, y)]) continue;
          const int bx = x + d.x;
          const int by = y + d.y;
          if (!size.contains(bx, by) || !bits[size.index(bx, by)]) candidates.push_back({x, y});
        }
      }
      for (const Pixel c : candidates) {
        const unsigned code = neighbourhood_code(bits, size, c.x, c.y);
        if (simple[code] && std::popcount(code) >= 2) {
          bits[size.index(c.x, c.y)] = 0;
          changed = true;
        }
      }
    }
  }

  // Break leftover 2x2 blocks. Pixels here may sit between distinct holes,
  // so only foreground connectivity is preserved. When every pixel of a block
  // anchors its own branch (two crossing digital lines), the pixel whose
  // removal detaches the fewest pixels is removed together with the
  // detached branch.
  const auto& joinable = fg_joinable_table();
  changed = true;
  while (changed) {
    changed = false;
    for (int y = 0; y + 1 < size.height; ++y) {
      for (int x = 0; x + 1 < size.width; ++x) {
        const std::array<Pixel, 4> block{{{x, y}, {x + 1, y}, {x, y + 1}, {x + 1, y + 1}}};
        bool full = true;
        for (const Pixel p : block) full = full && bits[size.index(p.x, p.y)];
        if (!full) continue;
        changed = true;
        bool removed = false;
        for (const Pixel p : block) {
          if (joinable[neighbourhood_code(bits, size, p.x, p.y)]) {
            bits[size.index(p.x, p.y)] = 0;
            removed = true;
            break;
          }
        }
        if (removed) continue;
        std::vector<std::size_t> best_cut;
        std::size_t best_pixel = 0;
        bool have_best = false;
        for (std::size_t k = 0; k < block.size(); ++k) {
          const Pixel p = block[k];
          // Any other block pixel stays connected to the rest of the block.
          const Pixel anchor = block[k == 0 ? 1 : 0];
          std::vector<std::size_t> cut = detached_after_removal(bits, size, p, anchor);
          if (!have_best || cut.size() < best_cut.size()) {
            best_cut = std::move(cut);
            best_pixel = size.index(p.x, p.y);
            have_best = true;
          }
        }
        bits[best_pixel] = 0;
        for (const std::size_t i : best_cut) bits[i] = 0;
      }
    }
  }
  return BinaryMask(size, std::move(bits));
}

BinaryMask boundary(const BinaryMask& mask) {
  const RasterSize size = mask.size;
  BinaryMask out(size);
  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) {
      if (!mask.at(x, y)) continue;
      const bool edge = x == 0 || y == 0 || x == size.width - 1 || y == size.height - 1 ||
                        !mask.at(x - 1, y) || !mask.at(x + 1, y) || !mask.at(x, y - 1) ||
                        !mask.at(x, y + 1);
      if (edge) out.set(x, y);
    }
  }
  return out;
}

RleMask rle_encode(const BinaryMask& mask) {
  RleMask rle{mask.size, {}};
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (const auto b : mask.bits) {
    const std::uint8_t v = b ? 1 : 0;
    if (v != current) {
      rle.runs.push_back(run);
      run = 0;
      current = v;
    }
    ++run;
  }
  rle.runs.push_back(run);
  return rle;
}

BinaryMask rle_decode(const RleMask& rle) {
  std::uint64_t total = 0;
  for (const auto r : rle.runs) total += r;
  if (total != rle.size.area()) {
    throw Error(ErrorCode::format, "RLE runs sum to " + std::to_string(total) + ", expected " +
                                       std::to_string(rle.size.area()));
  }
  BinaryMask out(rle.size);
  std::size_t pos = 0;
  std::uint8_t value = 0;
  for (const auto r : rle.runs) {
    if (value) std::fill_n(out.bits.begin() + static_cast<std::ptrdiff_t>(pos), r, 1);
    pos += r;
    value ^= 1;
  }
  return out;
}

std::vector<Pixel> bresenham(Pixel a, Pixel b) {
  std::vector<Pixel> out;
  const int dx = std::abs(b.x - a.x);
  const int dy = -std::abs(b.y - a.y);
  const int sx = a.x < b.x ? 1 : -1;
  const int sy = a.y < b.y ? 1 : -1;
  int err = dx + dy;
  Pixel p = a;
  for (;;) {
    out.push_back(p);
    if (p == b) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      p.x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      p.y += sy;
    }
  }
  return out;
}

Pixel to_pixel(Point2 p, RasterSize size) {
  if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "normalized coordinate outside [0,1]");
  }
  return {static_cast<int>(std::lround(p.x * (size.width - 1))),
          static_cast<int>(std::lround(p.y * (size.height - 1)))};
}

Point2 to_normalized(Pixel p, RasterSize size) {
  const double x = size.width > 1 ? static_cast<double>(p.x) / (size.width - 1) : 0.0;
  const double y = size.height > 1 ? static_cast<double>(p.y) / (size.height - 1) : 0.0;
  return {x, y};
}

BinaryMask rasterize_polyline(std::span<const Point2> points, RasterSize size, int thickness) {
  if (thickness < 1) throw Error(ErrorCode::invalid_argument, "thickness must be >= 1");
  BinaryMask out(size);
  std::vector<Pixel> px;
  px.reserve(points.size());
  for (const auto& p : points) px.push_back(to_pixel(p, size));
  if (px.size() == 1) out.set(px[0].x, px[0].y);
  for (std::size_t i = 1; i < px.size(); ++i) {
    for (const Pixel q : bresenham(px[i - 1], px[i])) out.set(q.x, q.y);
  }
  return dilate(out, StructuringElement::disk(thickness - 1));
}

bool is_subset(const BinaryMask& a, const BinaryMask& b) {
  if (a.size != b.size) throw Error(ErrorCode::size_mismatch, "mask sizes differ");
  return simd::active().count_and(a.bits.data(), b.bits.data(), a.bits.size()) == a.count();
}

}  // namespace ivos
