#pragma once

// Brute-force metric oracles: plain pixel loops and all-pairs distance
// matching, independent of the library's morphology and SIMD kernels.

#include <cmath>
#include <map>
#include <vector>

#include "ivos/metrics.hpp"
#include "test_support.hpp"

namespace ivos::testing {

inline BinaryMask oracle_extract(const LabelMask& m, ObjectId id) {
  BinaryMask out(m.size);
  for (int y = 0; y < m.size.height; ++y)
    for (int x = 0; x < m.size.width; ++x) out.set(x, y, m.at(x, y) == id);
  return out;
}

inline double oracle_jaccard(const BinaryMask& a, const BinaryMask& b) {
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (int y = 0; y < a.size.height; ++y)
    for (int x = 0; x < a.size.width; ++x) {
      inter += a.at(x, y) && b.at(x, y);
      uni += a.at(x, y) || b.at(x, y);
    }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline double oracle_boundary_f(const BinaryMask& pred, const BinaryMask& gt, double fraction) {
  const double diag = std::sqrt(static_cast<double>(pred.size.width) * pred.size.width +
                                static_cast<double>(pred.size.height) * pred.size.height);
  const int r = static_cast<int>(std::ceil(fraction * diag));
  std::vector<std::pair<int, int>> pb;
  std::vector<std::pair<int, int>> gb;
  const BinaryMask pbm = oracle_boundary(pred);
  const BinaryMask gbm = oracle_boundary(gt);
  for (int y = 0; y < pred.size.height; ++y)
    for (int x = 0; x < pred.size.width; ++x) {
      if (pbm.at(x, y)) pb.emplace_back(x, y);
      if (gbm.at(x, y)) gb.emplace_back(x, y);
    }
  if (pb.empty() && gb.empty()) return 1.0;
  if (pb.empty() || gb.empty()) return 0.0;
  auto matched = [r](const std::vector<std::pair<int, int>>& from, const std::vector<std::pair<int, int>>& to) {
    std::size_t hits = 0;
    for (const auto& [x, y] : from) {
      for (const auto& [u, v] : to) {
        if ((x - u) * (x - u) + (y - v) * (y - v) <= r * r) {
          ++hits;
          break;
        }
      }
    }
    return static_cast<double>(hits) / static_cast<double>(from.size());
  };
  const double p = matched(pb, gb);
  const double rc = matched(gb, pb);
  return p + rc == 0.0 ? 0.0 : 2.0 * p * rc / (p + rc);
}

inline int oracle_worst_frame(const SequenceScoreTable& t) {
  std::map<int, std::vector<double>> frames;
  for (const auto& s : t.scores) frames[s.frame].push_back(s.jf);
  int best = -1;
  double best_mean = 2.0;
  for (const auto& [f, v] : frames) {
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / static_cast<double>(v.size());
    if (mean < best_mean) {
      best_mean = mean;
      best = f;
    }
  }
  return best;
}

}  // namespace ivos::testing
