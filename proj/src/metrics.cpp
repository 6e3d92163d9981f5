#include "ivos/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "ivos/mask_ops.hpp"
#include "ivos/simd/kernels.hpp"

namespace ivos {

namespace {

void require_same_size(const BinaryMask& a, const BinaryMask& b) {
  if (a.size != b.size) throw Error(ErrorCode::size_mismatch, "prediction and ground truth sizes differ");
}

}  // namespace

BoundaryTolerance::BoundaryTolerance(double f) : fraction(f) {
  if (!(f > 0.0 && f < 1.0)) throw Error(ErrorCode::invalid_argument, "boundary tolerance must lie in (0,1)");
}

int BoundaryTolerance::radius_px(RasterSize size) const {
  const double diag = std::hypot(static_cast<double>(size.width), static_cast<double>(size.height));
  return static_cast<int>(std::ceil(fraction * diag));
}

double jaccard(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_size(pred, gt);
  const auto& k = simd::active();
  const std::size_t n = pred.bits.size();
  const std::size_t uni = k.count_or(pred.bits.data(), gt.bits.data(), n);
  if (uni == 0) return 1.0;
  const std::size_t inter = k.count_and(pred.bits.data(), gt.bits.data(), n);
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double boundary_f(const BinaryMask& pred, const BinaryMask& gt, BoundaryTolerance tol) {
  require_same_size(pred, gt);
  const BinaryMask pb = boundary(pred);
  const BinaryMask gb = boundary(gt);
  const std::size_t np = pb.count();
  const std::size_t ng = gb.count();
  if (np == 0 && ng == 0) return 1.0;
  if (np == 0 || ng == 0) return 0.0;

  const auto se = StructuringElement::disk(tol.radius_px(pred.size));
  const BinaryMask gb_dil = dilate(gb, se);
  const BinaryMask pb_dil = dilate(pb, se);
  const auto& k = simd::active();
  const std::size_t n = pb.bits.size();
  const double precision =
      static_cast<double>(k.count_and(pb.bits.data(), gb_dil.bits.data(), n)) / static_cast<double>(np);
  const double recall =
      static_cast<double>(k.count_and(gb.bits.data(), pb_dil.bits.data(), n)) / static_cast<double>(ng);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double jf(const BinaryMask& pred, const BinaryMask& gt, BoundaryTolerance tol) {
  return (jaccard(pred, gt) + boundary_f(pred, gt, tol)) / 2.0;
}

SequenceScoreTable evaluate_sequence(std::span<const LabelMask> preds, std::span<const LabelMask> gts,
                                     std::span<const ObjectId> objects, const std::set<int>& excluded,
                                     BoundaryTolerance tol) {
  if (preds.size() != gts.size()) {
    throw Error(ErrorCode::size_mismatch, "prediction has " + std::to_string(preds.size()) +
                                              " frames, ground truth has " + std::to_string(gts.size()));
  }
  SequenceScoreTable table;
  table.excluded = excluded;
  for (std::size_t t = 0; t < preds.size(); ++t) {
    if (preds[t].size != gts[t].size) {
      throw Error(ErrorCode::size_mismatch, "frame " + std::to_string(t) + " size differs from ground truth");
    }
    const int frame = static_cast<int>(t);
    if (excluded.contains(frame)) continue;
    for (const ObjectId id : objects) {
      const BinaryMask p = extract_object(preds[t], id);
      const BinaryMask g = extract_object(gts[t], id);
      FrameObjectScore s;
      s.frame = frame;
      s.object = id;
      s.j = jaccard(p, g);
      s.f = boundary_f(p, g, tol);
      s.jf = (s.j + s.f) / 2.0;
      table.scores.push_back(s);
    }
  }
  return table;
}

int worst_frame(const SequenceScoreTable& table) {
  if (table.empty()) throw Error(ErrorCode::invalid_argument, "worst_frame on an empty table");
  std::map<int, std::pair<double, int>> per_frame;
  for (const auto& s : table.scores) {
    auto& acc = per_frame[s.frame];
    acc.first += s.jf;
    acc.second += 1;
  }
  int best = -1;
  double best_mean = 0.0;
  for (const auto& [frame, acc] : per_frame) {  // ascending frame order
    const double mean = acc.first / acc.second;
    if (best < 0 || mean < best_mean) {
      best = frame;
      best_mean = mean;
    }
  }
  return best;
}

double aggregate(const SequenceScoreTable& table) {
  if (table.empty()) throw Error(ErrorCode::invalid_argument, "aggregate of an empty table");
  double sum = 0.0;
  for (const auto& s : table.scores) sum += s.jf;
  return sum / static_cast<double>(table.scores.size());
}

std::vector<std::pair<ObjectId, double>> per_object_means(const SequenceScoreTable& table) {
  std::vector<std::pair<ObjectId, double>> out;
  std::vector<int> counts;
  for (const auto& s : table.scores) {
    std::size_t i = 0;
    while (i < out.size() && out[i].first != s.object) ++i;
    if (i == out.size()) {
      out.emplace_back(s.object, 0.0);
      counts.push_back(0);
    }
    out[i].second += s.jf;
    counts[i] += 1;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].second /= counts[i];
  return out;
}

SequenceScoreTable without_frames(const SequenceScoreTable& table, const std::set<int>& frames) {
  SequenceScoreTable out;
  out.excluded = table.excluded;
  out.excluded.insert(frames.begin(), frames.end());
  for (const auto& s : table.scores) {
    if (!frames.contains(s.frame)) out.scores.push_back(s);
  }
  return out;
}

void write_score_csv(std::ostream& os, const SequenceScoreTable& table) {
  os << "frame,object,J,F,JF\n";
  char buf[128];
  for (const auto& s : table.scores) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.6f,%.6f,%.6f\n", s.frame, static_cast<int>(s.object), s.j, s.f, s.jf);
    os << buf;
  }
}

}  // namespace ivos
