#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ivos/mask_ops.hpp"
#include "ivos/raster.hpp"

namespace ivos {

struct ErrorRegions {
  BinaryMask false_neg;  // gt == object, pred != object
  BinaryMask false_pos;  // pred == object, gt != object
  ObjectId object = 0;
};

enum class ScribbleKind { human, simulated, bootstrap };

std::string_view to_string(ScribbleKind kind);

struct Scribble {
  int frame = 0;
  ObjectId object_label = 0;  // 0 marks background
  std::vector<Point2> path;   // normalized coordinates
  ScribbleKind kind = ScribbleKind::simulated;
  std::optional<double> start_time;
  std::optional<double> end_time;

  friend bool operator==(const Scribble&, const Scribble&) = default;
};

struct ScribbleSet {
  std::string sequence;
  std::vector<Scribble> scribbles;

  bool empty() const { return scribbles.empty(); }
  std::size_t total_points() const;
  /// Distinct frames referenced, ascending.
  std::vector<int> frames() const;

  friend bool operator==(const ScribbleSet&, const ScribbleSet&) = default;
};

/// Linear labelling-time model: base_s per non-empty set plus per_point_s
/// for every simplified path point.
struct AnnotationCostModel {
  double base_s = 1.5;
  double per_point_s = 0.04;

  void validate() const;
};

struct RobotParams {
  double min_area_fraction = 0.005;
  int max_components_per_kind = 1;
  double simplify_epsilon_px = 2.0;
  Connectivity connectivity = Connectivity::eight;

  void validate() const;
};

ErrorRegions error_regions(const LabelMask& pred, const LabelMask& gt, ObjectId object);

/// Keeps components with area >= min_area_fraction * frame_area, truncated to
/// the max_components_per_kind largest. Input order (largest first) is kept.
std::vector<Component> filter_spurious(std::vector<Component> components, std::size_t frame_area,
                                       const RobotParams& params);

/// Longest simple path through the 8-connected skeleton of the region.
///
/// Acyclic skeleton components use the tree diameter (double breadth-first
/// traversal). Components with cycles are searched exhaustively for the
/// longest simple path while the search stays within a fixed expansion
/// budget; past that budget the diameter of the breadth-first spanning tree
/// rooted at the component's first row-major pixel is used. All ties resolve
/// towards row-major order, and the path starts at its row-major-first end.
PixelPath skeleton_longest_path(const BinaryMask& region);

/// Recursive farthest-point simplification with endpoints always kept, then
/// normalization by (width - 1, height - 1). With `keep_inside`, a chord is
/// accepted only if its Bresenham raster stays inside that mask; otherwise
/// it is split further. Epsilon 0 keeps every point.
std::vector<Point2> simplify_path(const PixelPath& path, double epsilon, RasterSize size,
                                  const BinaryMask* keep_inside = nullptr);

/// Corrective scribbles for one frame. False-negative components are labelled
/// with the object id; false-positive components with the ground-truth
/// majority label of their pixels (ties to the lower label, 0 = background).
ScribbleSet generate_scribbles(const LabelMask& pred, const LabelMask& gt, int frame,
                               std::span<const ObjectId> objects, const RobotParams& params,
                               const std::string& sequence = {});

double estimate_annotation_time(const ScribbleSet& set, const AnnotationCostModel& model);

/// One foreground scribble per object, drawn as if the prediction were empty.
/// The area filter is disabled so every listed object gets a scribble.
ScribbleSet bootstrap_initial_scribbles(const LabelMask& gt, int frame, std::span<const ObjectId> objects,
                                        const RobotParams& params, const std::string& sequence = {});

}  // namespace ivos
