#pragma once

#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ivos/raster.hpp"

namespace ivos {

/// Boundary match tolerance as a fraction of the image diagonal.
struct BoundaryTolerance {
  double fraction = 0.008;

  BoundaryTolerance() = default;
  explicit BoundaryTolerance(double f);

  /// ceil(fraction * diagonal), in pixels.
  int radius_px(RasterSize size) const;
};

struct FrameObjectScore {
  int frame = 0;
  ObjectId object = 0;
  double j = 0.0;
  double f = 0.0;
  double jf = 0.0;
};

struct SequenceScoreTable {
  std::vector<FrameObjectScore> scores;  // frame-major, objects in declared order
  std::set<int> excluded;

  bool empty() const { return scores.empty(); }
};

/// |pred ∩ gt| / |pred ∪ gt|; 1 when both are empty.
double jaccard(const BinaryMask& pred, const BinaryMask& gt);

/// F-measure of boundary precision and recall, a boundary pixel counting as
/// matched when a pixel of the other boundary lies within the tolerance disk.
double boundary_f(const BinaryMask& pred, const BinaryMask& gt, BoundaryTolerance tol = {});

double jf(const BinaryMask& pred, const BinaryMask& gt, BoundaryTolerance tol = {});

SequenceScoreTable evaluate_sequence(std::span<const LabelMask> preds, std::span<const LabelMask> gts,
                                     std::span<const ObjectId> objects, const std::set<int>& excluded = {},
                                     BoundaryTolerance tol = {});

/// Frame with the lowest mean J&F across objects; ties go to the lowest index.
int worst_frame(const SequenceScoreTable& table);

/// Mean J&F over every cell.
double aggregate(const SequenceScoreTable& table);

/// Mean J&F per object over the table's frames, in first-seen object order.
std::vector<std::pair<ObjectId, double>> per_object_means(const SequenceScoreTable& table);

/// Copy of the table without the given frames.
SequenceScoreTable without_frames(const SequenceScoreTable& table, const std::set<int>& frames);

/// CSV with header frame,object,J,F,JF and six decimals.
void write_score_csv(std::ostream& os, const SequenceScoreTable& table);

}  // namespace ivos
