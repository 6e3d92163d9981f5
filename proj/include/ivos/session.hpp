#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ivos/metrics.hpp"
#include "ivos/robot.hpp"

namespace ivos {

enum class Phase { awaiting_prediction, awaiting_scribble_pickup, closed };

std::string_view to_string(Phase phase);

struct TrackParams {
  double budget_rate_s = 5.0;  // seconds per frame per object
  double threshold = 0.60;
  double cap_s = 300.0;

  void validate() const;
};

struct SessionConfig {
  std::string sequence;
  std::vector<ObjectId> objects;
  int max_interactions = 8;
  std::optional<double> wall_budget_s;
  BoundaryTolerance tolerance;
  RobotParams robot;
  AnnotationCostModel cost_model;
  TrackParams tracks;

  void validate() const;
};

struct InteractionRecord {
  int index = 0;  // 1-based
  double annotation_s = 0.0;
  double compute_s = 0.0;
  double cumulative_s = 0.0;
  SequenceScoreTable table;  // empty when rebuilt from a log
  double overall = 0.0;
  std::vector<std::pair<ObjectId, double>> per_object;
};

struct CurvePoint {
  double time_s = 0.0;
  double value = 0.0;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct QualityTimeCurve {
  std::vector<CurvePoint> points;
  std::vector<std::pair<ObjectId, std::vector<CurvePoint>>> per_object;
};

struct QualityAtBudget {
  double budget_s = 0.0;
  double value = 0.0;
};

struct TimeToQuality {
  double threshold = 0.0;
  double total_s = 0.0;
  std::vector<double> per_object_s;  // cap_s where the threshold is never reached
  bool all_reached = true;
};

struct TrackSummary {
  double quality_at_budget = 0.0;
  double budget_s = 0.0;
  double speed_total_s = 0.0;
  bool speed_reached = true;  // false when some object fell back to the cap
  double threshold = 0.0;
};

/// One point per record; no best-so-far smoothing.
QualityTimeCurve make_curve(std::span<const InteractionRecord> records);

/// Value of the last point with time <= t; 0 before the first point.
double step_value(std::span<const CurvePoint> points, double t);

QualityAtBudget quality_at_budget(const QualityTimeCurve& curve, double rate_s, int frames, int objects);

/// Per object, the earliest time whose value reaches the threshold, or cap_s.
/// Times are read off the shared session clock.
TimeToQuality time_to_quality(const QualityTimeCurve& curve, double threshold, double cap_s);

TrackSummary summarize_tracks(const QualityTimeCurve& curve, int frames, int objects, const TrackParams& params);

struct SessionReport {
  std::string session_id;
  std::string sequence;
  int frames = 0;
  int objects = 0;
  QualityTimeCurve curve;
  TrackSummary summary;
};

struct AggregateReport {
  std::vector<CurvePoint> grid;  // mean of step-interpolated session curves
  double mean_quality_at_budget = 0.0;
  double total_speed_s = 0.0;
  std::vector<SessionReport> sessions;
};

/// Sessions are sampled at 0, step, 2*step, ... up to the latest curve time.
AggregateReport aggregate_report(std::span<const SessionReport> sessions, double grid_step_s = 1.0);

/// time_s,mean_jf
void write_curve_csv(std::ostream& os, const AggregateReport& report);
/// session,sequence,frames,objects,budget_s,quality_at_budget,threshold,speed_total_s
/// plus a closing "all" row (mean quality, summed speed).
void write_track_csv(std::ostream& os, const AggregateReport& report);

/// Seconds on a monotonic clock.
using SessionClock = std::function<double()>;
SessionClock steady_session_clock();

/// Human pool scribbles with start and end stamps on every stroke take the
/// stamped durations; everything else goes through the cost model.
double scribble_annotation_time(const ScribbleSet& set, const AnnotationCostModel& model);

/// Frame maximizing the summed area of the given objects; ties to the lowest index.
int largest_objects_frame(std::span<const LabelMask> gt, std::span<const ObjectId> objects);

struct SubmitOutcome {
  InteractionRecord record;
  bool closed = false;
  std::string reason;  // max-interactions | budget | error-free | no-corrections
  ScribbleSet next;
};

/// Server-side interaction state machine for one sequence.
///
/// open -> awaiting_prediction -> submit -> awaiting_scribble_pickup
///      -> mark_delivered -> awaiting_prediction ... -> closed
/// compute_s runs from the last anchor (open or mark_delivered) to submit.
class Session {
 public:
  /// Opening picks the pool scribbles when given, else bootstraps on the
  /// frame where the objects are largest. The clock is anchored here.
  Session(SessionConfig config, std::shared_ptr<const std::vector<LabelMask>> gt,
          std::optional<ScribbleSet> pool = std::nullopt, SessionClock clock = steady_session_clock());

  Phase phase() const { return phase_; }
  const SessionConfig& config() const { return config_; }
  int frames() const { return static_cast<int>(gt_->size()); }
  RasterSize size() const { return gt_->front().size; }
  const ScribbleSet& initial_scribbles() const { return initial_; }
  const std::set<int>& initial_frames() const { return initial_frames_; }
  const ScribbleSet& last_scribbles() const { return last_; }
  const std::vector<InteractionRecord>& history() const { return history_; }
  const std::string& close_reason() const { return reason_; }

  /// Scores the masks and either closes or prepares the next scribbles.
  /// Throws without changing any state when out of phase or the masks do
  /// not match the sequence.
  SubmitOutcome submit(std::span<const LabelMask> masks);

  /// The pending scribbles were handed to the client: re-anchor the clock.
  void mark_delivered();

  QualityTimeCurve curve() const;
  TrackSummary summary() const;

 private:
  void check_masks(std::span<const LabelMask> masks) const;

  SessionConfig config_;
  std::shared_ptr<const std::vector<LabelMask>> gt_;
  SessionClock clock_;
  Phase phase_ = Phase::awaiting_prediction;
  ScribbleSet initial_;
  std::set<int> initial_frames_;
  ScribbleSet last_;
  double pending_annotation_s_ = 0.0;
  double anchor_ = 0.0;
  std::vector<InteractionRecord> history_;
  std::string reason_;
};

}  // namespace ivos
