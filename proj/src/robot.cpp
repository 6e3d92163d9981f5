#include "ivos/robot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

namespace ivos {

std::string_view to_string(ScribbleKind kind) {
  switch (kind) {
    case ScribbleKind::human: return "human";
    case ScribbleKind::simulated: return "simulated";
    case ScribbleKind::bootstrap: return "bootstrap";
  }
  return "unknown";
}

std::size_t ScribbleSet::total_points() const {
  std::size_t n = 0;
  for (const auto& s : scribbles) n += s.path.size();
  return n;
}

std::vector<int> ScribbleSet::frames() const {
  std::set<int> f;
  for (const auto& s : scribbles) f.insert(s.frame);
  return {f.begin(), f.end()};
}

void AnnotationCostModel::validate() const {
  if (!(base_s >= 0.0) || !(per_point_s >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "annotation cost model terms must be >= 0");
  }
}

void RobotParams::validate() const {
  if (!(min_area_fraction >= 0.0 && min_area_fraction < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "min_area_fraction must lie in [0,1)");
  }
  if (max_components_per_kind < 0) throw Error(ErrorCode::invalid_argument, "max_components_per_kind must be >= 0");
  if (!(simplify_epsilon_px >= 0.0)) throw Error(ErrorCode::invalid_argument, "simplify epsilon must be >= 0");
}

ErrorRegions error_regions(const LabelMask& pred, const LabelMask& gt, ObjectId object) {
  if (pred.size != gt.size) throw Error(ErrorCode::size_mismatch, "prediction and ground truth sizes differ");
  ErrorRegions r{BinaryMask(gt.size), BinaryMask(gt.size), object};
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    const bool in_gt = gt.labels[i] == object;
    const bool in_pred = pred.labels[i] == object;
    r.false_neg.bits[i] = in_gt && !in_pred;
    r.false_pos.bits[i] = in_pred && !in_gt;
  }
  return r;
}

std::vector<Component> filter_spurious(std::vector<Component> components, std::size_t frame_area,
                                       const RobotParams& params) {
  const double threshold = params.min_area_fraction * static_cast<double>(frame_area);
  std::vector<Component> kept;
  for (auto& c : components) {
    if (static_cast<double>(c.area) >= threshold) kept.push_back(std::move(c));
  }
  if (kept.size() > static_cast<std::size_t>(params.max_components_per_kind)) {
    kept.resize(static_cast<std::size_t>(params.max_components_per_kind));
  }
  return kept;
}

namespace {

// Skeleton pixels as a graph; node ids follow row-major order, and every
// adjacency list is sorted by node id.
struct SkeletonGraph {
  std::vector<Pixel> nodes;
  std::vector<std::vector<int>> adj;
};

SkeletonGraph build_graph(const BinaryMask& skel) {
  SkeletonGraph g;
  const RasterSize size = skel.size;
  std::unordered_map<std::size_t, int> id_of;
  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) {
      if (skel.at(x, y)) {
        id_of[size.index(x, y)] = static_cast<int>(g.nodes.size());
        g.nodes.push_back({x, y});
      }
    }
  }
  g.adj.resize(g.nodes.size());
  static constexpr std::array<Pixel, 8> kRowMajor{{{-1, -1}, {0, -1}, {1, -1}, {-1, 0},
                                                   {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const Pixel p = g.nodes[i];
    for (const Pixel d : kRowMajor) {
      const int nx = p.x + d.x;
      const int ny = p.y + d.y;
      if (size.contains(nx, ny) && skel.at(nx, ny)) g.adj[i].push_back(id_of.at(size.index(nx, ny)));
    }
  }
  return g;
}

// BFS over the given adjacency; returns the farthest node (lowest id on ties)
// and fills parents.
int bfs_farthest(const std::vector<std::vector<int>>& adj, int start, std::vector<int>& parent) {
  std::vector<int> dist(adj.size(), -1);
  parent.assign(adj.size(), -1);
  std::deque<int> queue{start};
  dist[static_cast<std::size_t>(start)] = 0;
  int far = start;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    const int du = dist[static_cast<std::size_t>(u)];
    const int df = dist[static_cast<std::size_t>(far)];
    if (du > df || (du == df && u < far)) far = u;
    for (const int v : adj[static_cast<std::size_t>(u)]) {
      if (dist[static_cast<std::size_t>(v)] < 0) {
        dist[static_cast<std::size_t>(v)] = du + 1;
        parent[static_cast<std::size_t>(v)] = u;
        queue.push_back(v);
      }
    }
  }
  return far;
}

std::vector<int> tree_diameter(const std::vector<std::vector<int>>& tree, int root) {
  std::vector<int> parent;
  const int a = bfs_farthest(tree, root, parent);
  const int b = bfs_farthest(tree, a, parent);
  std::vector<int> path;
  for (int v = b; v >= 0; v = parent[static_cast<std::size_t>(v)]) path.push_back(v);
  std::reverse(path.begin(), path.end());  // a ... b
  return path;
}

std::vector<std::vector<int>> bfs_spanning_tree(const std::vector<std::vector<int>>& adj,
                                                const std::vector<int>& members, int root) {
  std::vector<std::vector<int>> tree(adj.size());
  std::vector<int> parent;
  bfs_farthest(adj, root, parent);
  for (const int v : members) {
    const int p = parent[static_cast<std::size_t>(v)];
    if (p >= 0) {
      tree[static_cast<std::size_t>(v)].push_back(p);
      tree[static_cast<std::size_t>(p)].push_back(v);
    }
  }
  for (auto& l : tree) std::sort(l.begin(), l.end());
  return tree;
}

// Depth-first search for the longest simple path in a small cyclic component.
class LongestPathSearch {
 public:
  LongestPathSearch(const std::vector<std::vector<int>>& adj, std::size_t component_size, long budget)
      : adj_(adj), component_size_(component_size), budget_(budget), on_path_(adj.size(), 0) {}

  // Empty result when the budget ran out.
  std::vector<int> run(const std::vector<int>& members) {
    for (const int s : members) {
      current_.assign(1, s);
      on_path_[static_cast<std::size_t>(s)] = 1;
      extend(s);
      on_path_[static_cast<std::size_t>(s)] = 0;
      if (exhausted_) return {};
      if (best_.size() == component_size_) break;
    }
    return best_;
  }

 private:
  void extend(int u) {
    if (exhausted_ || best_.size() == component_size_) return;
    if (--budget_ < 0) {
      exhausted_ = true;
      return;
    }
    if (current_.size() > best_.size()) best_ = current_;
    for (const int v : adj_[static_cast<std::size_t>(u)]) {
      if (on_path_[static_cast<std::size_t>(v)]) continue;
      on_path_[static_cast<std::size_t>(v)] = 1;
      current_.push_back(v);
      extend(v);
      current_.pop_back();
      on_path_[static_cast<std::size_t>(v)] = 0;
      if (exhausted_) return;
    }
  }

  const std::vector<std::vector<int>>& adj_;
  std::size_t component_size_;
  long budget_;
  std::vector<char> on_path_;
  std::vector<int> current_;
  std::vector<int> best_;
  bool exhausted_ = false;
};

constexpr long kExactSearchBudget = 200000;

}  // namespace

PixelPath skeleton_longest_path(const BinaryMask& region) {
  if (region.empty()) throw Error(ErrorCode::invalid_argument, "skeleton_longest_path on an empty region");
  const SkeletonGraph g = build_graph(skeletonize(region));

  std::vector<int> best;
  std::vector<char> seen(g.nodes.size(), 0);
  for (std::size_t root = 0; root < g.nodes.size(); ++root) {
    if (seen[root]) continue;
    std::vector<int> members;
    std::deque<int> queue{static_cast<int>(root)};
    seen[root] = 1;
    std::size_t degree_sum = 0;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      members.push_back(u);
      degree_sum += g.adj[static_cast<std::size_t>(u)].size();
      for (const int v : g.adj[static_cast<std::size_t>(u)]) {
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          queue.push_back(v);
        }
      }
    }
    std::sort(members.begin(), members.end());
    const std::size_t edges = degree_sum / 2;
    std::vector<int> path;
    if (edges + 1 == members.size()) {
      path = tree_diameter(g.adj, static_cast<int>(root));
    } else {
      LongestPathSearch search(g.adj, members.size(), kExactSearchBudget);
      path = search.run(members);
      if (path.empty()) path = tree_diameter(bfs_spanning_tree(g.adj, members, static_cast<int>(root)), static_cast<int>(root));
    }
    if (path.size() > best.size()) best = std::move(path);
  }

  if (best.front() > best.back()) std::reverse(best.begin(), best.end());
  PixelPath out;
  out.points.reserve(best.size());
  for (const int v : best) out.points.push_back(g.nodes[static_cast<std::size_t>(v)]);
  return out;
}

namespace {

double point_segment_distance(Pixel p, Pixel a, Pixel b) {
  const double vx = b.x - a.x;
  const double vy = b.y - a.y;
  const double wx = p.x - a.x;
  const double wy = p.y - a.y;
  const double len2 = vx * vx + vy * vy;
  if (len2 == 0.0) return std::hypot(wx, wy);
  const double t = std::clamp((wx * vx + wy * vy) / len2, 0.0, 1.0);
  return std::hypot(wx - t * vx, wy - t * vy);
}

bool chord_inside(Pixel a, Pixel b, const BinaryMask& region) {
  for (const Pixel q : bresenham(a, b)) {
    if (!region.size.contains(q.x, q.y) || !region.at(q.x, q.y)) return false;
  }
  return true;
}

}  // namespace

std::vector<Point2> simplify_path(const PixelPath& path, double epsilon, RasterSize size,
                                  const BinaryMask* keep_inside) {
  const auto& pts = path.points;
  if (pts.empty()) throw Error(ErrorCode::invalid_argument, "simplify_path on an empty path");
  const std::size_t n = pts.size();
  std::vector<char> keep(n, 0);
  keep.front() = 1;
  keep.back() = 1;
  if (epsilon <= 0.0) {
    std::fill(keep.begin(), keep.end(), 1);
  } else {
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, n - 1}};
    while (!stack.empty()) {
      const auto [first, last] = stack.back();
      stack.pop_back();
      if (last <= first + 1) continue;
      std::size_t split = first;
      double max_d = -1.0;
      for (std::size_t i = first + 1; i < last; ++i) {
        const double d = point_segment_distance(pts[i], pts[first], pts[last]);
        if (d > max_d) {
          max_d = d;
          split = i;
        }
      }
      bool accept = max_d <= epsilon;
      if (accept && keep_inside != nullptr && !chord_inside(pts[first], pts[last], *keep_inside)) {
        accept = false;
        if (max_d <= 0.0) split = first + (last - first) / 2;
      }
      if (accept) continue;
      keep[split] = 1;
      stack.emplace_back(split, last);
      stack.emplace_back(first, split);
    }
  }
  std::vector<Point2> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(to_normalized(pts[i], size));
  }
  return out;
}

namespace {

ObjectId majority_label(const BinaryMask& component, const LabelMask& gt) {
  std::array<std::size_t, 256> counts{};
  for (std::size_t i = 0; i < component.bits.size(); ++i) {
    if (component.bits[i]) ++counts[gt.labels[i]];
  }
  std::size_t best = 0;
  for (std::size_t l = 1; l < counts.size(); ++l) {
    if (counts[l] > counts[best]) best = l;
  }
  return static_cast<ObjectId>(best);
}

Scribble scribble_from_component(const Component& c, ObjectId label, int frame, const RobotParams& params,
                                 ScribbleKind kind) {
  const PixelPath path = skeleton_longest_path(c.mask);
  Scribble s;
  s.frame = frame;
  s.object_label = label;
  s.kind = kind;
  s.path = simplify_path(path, params.simplify_epsilon_px, c.mask.size, &c.mask);
  return s;
}

ScribbleSet generate_impl(const LabelMask& pred, const LabelMask& gt, int frame, std::span<const ObjectId> objects,
                          const RobotParams& params, const std::string& sequence, ScribbleKind kind) {
  params.validate();
  if (pred.size != gt.size) throw Error(ErrorCode::size_mismatch, "prediction and ground truth sizes differ");
  ScribbleSet set;
  set.sequence = sequence;
  const std::size_t area = gt.size.area();
  for (const ObjectId id : objects) {
    const ErrorRegions regions = error_regions(pred, gt, id);
    for (const auto& c : filter_spurious(connected_components(regions.false_neg, params.connectivity), area, params)) {
      set.scribbles.push_back(scribble_from_component(c, id, frame, params, kind));
    }
    for (const auto& c : filter_spurious(connected_components(regions.false_pos, params.connectivity), area, params)) {
      set.scribbles.push_back(scribble_from_component(c, majority_label(c.mask, gt), frame, params, kind));
    }
  }
  return set;
}

}  // namespace

ScribbleSet generate_scribbles(const LabelMask& pred, const LabelMask& gt, int frame,
                               std::span<const ObjectId> objects, const RobotParams& params,
                               const std::string& sequence) {
  return generate_impl(pred, gt, frame, objects, params, sequence, ScribbleKind::simulated);
}

double estimate_annotation_time(const ScribbleSet& set, const AnnotationCostModel& model) {
  if (set.empty()) return 0.0;
  return model.base_s + model.per_point_s * static_cast<double>(set.total_points());
}

ScribbleSet bootstrap_initial_scribbles(const LabelMask& gt, int frame, std::span<const ObjectId> objects,
                                        const RobotParams& params, const std::string& sequence) {
  for (const ObjectId id : objects) {
    if (std::find(gt.labels.begin(), gt.labels.end(), id) == gt.labels.end()) {
      throw Error(ErrorCode::invalid_argument,
                  "object " + std::to_string(id) + " is absent from frame " + std::to_string(frame));
    }
  }
  RobotParams p = params;
  p.min_area_fraction = 0.0;
  p.max_components_per_kind = 1;
  const LabelMask empty(gt.size);
  return generate_impl(empty, gt, frame, objects, p, sequence, ScribbleKind::bootstrap);
}

}  // namespace ivos
