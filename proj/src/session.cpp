#include "ivos/session.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "ivos/error.hpp"
#include "ivos/mask_ops.hpp"

namespace ivos {

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::awaiting_prediction: return "awaiting_prediction";
    case Phase::awaiting_scribble_pickup: return "awaiting_scribble_pickup";
    case Phase::closed: return "closed";
  }
  return "unknown";
}

void TrackParams::validate() const {
  if (!(budget_rate_s > 0.0)) throw Error(ErrorCode::invalid_argument, "budget rate must be > 0");
  if (!(threshold > 0.0 && threshold <= 1.0)) throw Error(ErrorCode::invalid_argument, "threshold must lie in (0,1]");
  if (!(cap_s >= 0.0)) throw Error(ErrorCode::invalid_argument, "cap must be >= 0");
}

void SessionConfig::validate() const {
  if (objects.empty()) throw Error(ErrorCode::invalid_argument, "session needs at least one object");
  for (const ObjectId id : objects) {
    if (id == 0) throw Error(ErrorCode::invalid_argument, "object id 0 is background");
  }
  if (std::set<ObjectId>(objects.begin(), objects.end()).size() != objects.size()) {
    throw Error(ErrorCode::invalid_argument, "duplicate object ids");
  }
  if (max_interactions < 1) throw Error(ErrorCode::invalid_argument, "max_interactions must be >= 1");
  if (wall_budget_s && !(*wall_budget_s > 0.0)) throw Error(ErrorCode::invalid_argument, "wall budget must be > 0");
  robot.validate();
  cost_model.validate();
  tracks.validate();
}

QualityTimeCurve make_curve(std::span<const InteractionRecord> records) {
  if (records.empty()) throw Error(ErrorCode::invalid_argument, "curve needs at least one record");
  QualityTimeCurve c;
  for (const auto& r : records) {
    c.points.push_back({r.cumulative_s, r.overall});
    for (const auto& [id, v] : r.per_object) {
      auto it = std::find_if(c.per_object.begin(), c.per_object.end(), [id = id](const auto& e) { return e.first == id; });
      if (it == c.per_object.end()) {
        c.per_object.push_back({id, {}});
        it = std::prev(c.per_object.end());
      }
      it->second.push_back({r.cumulative_s, v});
    }
  }
  return c;
}

double step_value(std::span<const CurvePoint> points, double t) {
  double v = 0.0;
  for (const auto& p : points) {
    if (p.time_s > t) break;
    v = p.value;
  }
  return v;
}

QualityAtBudget quality_at_budget(const QualityTimeCurve& curve, double rate_s, int frames, int objects) {
  if (!(rate_s > 0.0)) throw Error(ErrorCode::invalid_argument, "budget rate must be > 0");
  QualityAtBudget q;
  q.budget_s = rate_s * frames * objects;
  q.value = step_value(curve.points, q.budget_s);
  return q;
}

TimeToQuality time_to_quality(const QualityTimeCurve& curve, double threshold, double cap_s) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw Error(ErrorCode::invalid_argument, "threshold must lie in (0,1]");
  TimeToQuality t;
  t.threshold = threshold;
  for (const auto& [id, points] : curve.per_object) {
    double when = cap_s;
    bool reached = false;
    for (const auto& p : points) {
      if (p.value >= threshold) {
        when = p.time_s;
        reached = true;
        break;
      }
    }
    t.all_reached = t.all_reached && reached;
    t.per_object_s.push_back(when);
    t.total_s += when;
  }
  return t;
}

TrackSummary summarize_tracks(const QualityTimeCurve& curve, int frames, int objects, const TrackParams& params) {
  params.validate();
  const QualityAtBudget q = quality_at_budget(curve, params.budget_rate_s, frames, objects);
  const TimeToQuality t = time_to_quality(curve, params.threshold, params.cap_s);
  return {q.value, q.budget_s, t.total_s, t.all_reached, params.threshold};
}

AggregateReport aggregate_report(std::span<const SessionReport> sessions, double grid_step_s) {
  if (sessions.empty()) throw Error(ErrorCode::invalid_argument, "aggregate_report needs at least one session");
  if (!(grid_step_s > 0.0)) throw Error(ErrorCode::invalid_argument, "grid step must be > 0");
  AggregateReport out;
  out.sessions.assign(sessions.begin(), sessions.end());
  double t_max = 0.0;
  for (const auto& s : sessions) {
    if (!s.curve.points.empty()) t_max = std::max(t_max, s.curve.points.back().time_s);
    out.mean_quality_at_budget += s.summary.quality_at_budget;
    out.total_speed_s += s.summary.speed_total_s;
  }
  out.mean_quality_at_budget /= static_cast<double>(sessions.size());
  const auto steps = static_cast<std::size_t>(std::ceil(t_max / grid_step_s));
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * grid_step_s;
    double sum = 0.0;
    for (const auto& s : sessions) sum += step_value(s.curve.points, t);
    out.grid.push_back({t, sum / static_cast<double>(sessions.size())});
  }
  return out;
}

void write_curve_csv(std::ostream& os, const AggregateReport& report) {
  os << "time_s,mean_jf\n";
  char line[64];
  for (const auto& p : report.grid) {
    std::snprintf(line, sizeof line, "%.3f,%.6f\n", p.time_s, p.value);
    os << line;
  }
}

void write_track_csv(std::ostream& os, const AggregateReport& report) {
  os << "session,sequence,frames,objects,budget_s,quality_at_budget,threshold,speed_total_s\n";
  char line[256];
  double budget_sum = 0.0;
  for (const auto& s : report.sessions) {
    std::snprintf(line, sizeof line, ",%d,%d,%.3f,%.6f,%.2f,%.3f\n", s.frames, s.objects, s.summary.budget_s,
                  s.summary.quality_at_budget, s.summary.threshold, s.summary.speed_total_s);
    os << s.session_id << ',' << s.sequence << line;
    budget_sum += s.summary.budget_s;
  }
  std::snprintf(line, sizeof line, "all,all,,,%.3f,%.6f,,%.3f\n", budget_sum, report.mean_quality_at_budget,
                report.total_speed_s);
  os << line;
}

SessionClock steady_session_clock() {
  return [] {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
  };
}

double scribble_annotation_time(const ScribbleSet& set, const AnnotationCostModel& model) {
  if (set.empty()) return 0.0;
  const bool stamped = std::all_of(set.scribbles.begin(), set.scribbles.end(), [](const Scribble& s) {
    return s.kind == ScribbleKind::human && s.start_time && s.end_time;
  });
  if (!stamped) return estimate_annotation_time(set, model);
  double total = 0.0;
  for (const auto& s : set.scribbles) total += std::max(0.0, *s.end_time - *s.start_time);
  return total;
}

int largest_objects_frame(std::span<const LabelMask> gt, std::span<const ObjectId> objects) {
  if (gt.empty()) throw Error(ErrorCode::invalid_argument, "sequence has no frames");
  int best = 0;
  std::size_t best_area = 0;
  for (std::size_t f = 0; f < gt.size(); ++f) {
    std::size_t area = 0;
    for (const ObjectId id : objects) area += extract_object(gt[f], id).count();
    if (f == 0 || area > best_area) {
      best = static_cast<int>(f);
      best_area = area;
    }
  }
  return best;
}

Session::Session(SessionConfig config, std::shared_ptr<const std::vector<LabelMask>> gt,
                 std::optional<ScribbleSet> pool, SessionClock clock)
    : config_(std::move(config)), gt_(std::move(gt)), clock_(std::move(clock)) {
  config_.validate();
  if (!gt_ || gt_->empty()) throw Error(ErrorCode::invalid_argument, "sequence has no ground truth frames");
  for (const auto& m : *gt_) {
    if (m.size != gt_->front().size) throw Error(ErrorCode::size_mismatch, "ground truth frames differ in size");
  }
  if (pool && !pool->empty()) {
    for (const auto& s : pool->scribbles) {
      if (s.frame < 0 || s.frame >= frames()) throw Error(ErrorCode::format, "pool scribble frame out of range");
    }
    initial_ = std::move(*pool);
    initial_.sequence = config_.sequence;
  } else {
    const int f = largest_objects_frame(*gt_, config_.objects);
    initial_ = bootstrap_initial_scribbles((*gt_)[static_cast<std::size_t>(f)], f, config_.objects, config_.robot,
                                           config_.sequence);
  }
  const auto fr = initial_.frames();
  initial_frames_.insert(fr.begin(), fr.end());
  last_ = initial_;
  pending_annotation_s_ = scribble_annotation_time(initial_, config_.cost_model);
  anchor_ = clock_();
}

void Session::check_masks(std::span<const LabelMask> masks) const {
  if (masks.size() != gt_->size()) {
    throw Error(ErrorCode::size_mismatch, "expected " + std::to_string(gt_->size()) + " frames, got " +
                                              std::to_string(masks.size()));
  }
  std::array<bool, 256> allowed{};
  allowed[0] = true;
  for (const ObjectId id : config_.objects) allowed[id] = true;
  for (std::size_t f = 0; f < masks.size(); ++f) {
    if (masks[f].size != size()) {
      throw Error(ErrorCode::size_mismatch, "frame " + std::to_string(f) + " has the wrong raster size");
    }
    for (const ObjectId v : masks[f].labels) {
      if (!allowed[v]) {
        throw Error(ErrorCode::format, "frame " + std::to_string(f) + " uses undeclared label " + std::to_string(v));
      }
    }
  }
}

SubmitOutcome Session::submit(std::span<const LabelMask> masks) {
  if (phase_ == Phase::closed) throw Error(ErrorCode::phase, "session is closed");
  if (phase_ != Phase::awaiting_prediction) throw Error(ErrorCode::phase, "scribbles not yet picked up");
  check_masks(masks);

  SubmitOutcome out;
  InteractionRecord& r = out.record;
  r.compute_s = std::max(0.0, clock_() - anchor_);
  r.index = static_cast<int>(history_.size()) + 1;
  r.annotation_s = pending_annotation_s_;
  r.cumulative_s = (history_.empty() ? 0.0 : history_.back().cumulative_s) + r.annotation_s + r.compute_s;
  r.table = evaluate_sequence(masks, *gt_, config_.objects, {}, config_.tolerance);
  r.overall = aggregate(r.table);
  r.per_object = per_object_means(r.table);

  if (r.index >= config_.max_interactions) {
    out.closed = true;
    out.reason = "max-interactions";
  } else if (config_.wall_budget_s && r.cumulative_s >= *config_.wall_budget_s) {
    out.closed = true;
    out.reason = "budget";
  } else {
    SequenceScoreTable candidates = without_frames(r.table, initial_frames_);
    if (candidates.empty()) candidates = r.table;
    const int f = worst_frame(candidates);
    const auto fi = static_cast<std::size_t>(f);
    out.next = generate_scribbles(masks[fi], (*gt_)[fi], f, config_.objects, config_.robot, config_.sequence);
    if (out.next.empty()) {
      out.closed = true;
      const bool perfect =
          std::all_of(r.table.scores.begin(), r.table.scores.end(), [](const auto& s) { return s.jf == 1.0; });
      out.reason = perfect ? "error-free" : "no-corrections";
    }
  }

  history_.push_back(r);
  if (out.closed) {
    phase_ = Phase::closed;
    reason_ = out.reason;
    last_ = {};
    last_.sequence = config_.sequence;
  } else {
    phase_ = Phase::awaiting_scribble_pickup;
    last_ = out.next;
    pending_annotation_s_ = scribble_annotation_time(out.next, config_.cost_model);
  }
  return out;
}

void Session::mark_delivered() {
  if (phase_ != Phase::awaiting_scribble_pickup) throw Error(ErrorCode::phase, "no scribbles awaiting pickup");
  phase_ = Phase::awaiting_prediction;
  anchor_ = clock_();
}

QualityTimeCurve Session::curve() const { return make_curve(history_); }

TrackSummary Session::summary() const {
  return summarize_tracks(curve(), frames(), static_cast<int>(config_.objects.size()), config_.tracks);
}

}  // namespace ivos
