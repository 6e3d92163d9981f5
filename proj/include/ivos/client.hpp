#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ivos/baseline.hpp"
#include "ivos/features.hpp"
#include "ivos/robot.hpp"
#include "json.hpp"

namespace ivos {

class EvaluationService;

struct SequenceMeta {
  std::string session_id;
  std::string sequence;
  int frames = 0;
  RasterSize size;
  std::vector<ObjectId> objects;
};

struct StartResult {
  SequenceMeta meta;
  ScribbleSet scribbles;
};

struct TurnResult {
  bool closed = false;
  ScribbleSet scribbles;
  nlohmann::json report;  // set on closure
};

/// Client side of the wire protocol.
class Endpoint {
 public:
  virtual ~Endpoint() = default;
  virtual StartResult start(const std::string& sequence) = 0;
  virtual TurnResult submit(const std::string& session_id, std::span<const LabelMask> masks) = 0;
  /// Offline endpoints advance their session clock by the segmenter time;
  /// networked ones leave timing to the server.
  virtual void charge_compute(double /*seconds*/) {}
};

/// Parses a start response body.
StartResult parse_start_response(const nlohmann::json& j);
/// Parses a prediction response body.
TurnResult parse_turn_response(const nlohmann::json& j);

/// Talks to an in-process service through the same JSON bodies as HTTP.
class ServiceEndpoint : public Endpoint {
 public:
  ServiceEndpoint(EvaluationService& service, std::string token);
  StartResult start(const std::string& sequence) override;
  TurnResult submit(const std::string& session_id, std::span<const LabelMask> masks) override;

 private:
  EvaluationService& service_;
  std::string token_;
};

struct RetryPolicy {
  int attempts = 4;
  int initial_backoff_ms = 100;
  int max_backoff_ms = 2000;
};

/// HTTP transport. Connection failures are retried with doubling backoff;
/// error responses from the server abort immediately as ivos::Error with
/// the wire code mapped back.
class HttpEndpoint : public Endpoint {
 public:
  HttpEndpoint(std::string host, int port, std::string token, RetryPolicy retry = {});
  ~HttpEndpoint() override;
  StartResult start(const std::string& sequence) override;
  TurnResult submit(const std::string& session_id, std::span<const LabelMask> masks) override;
  nlohmann::json report(const std::string& session_id);

 private:
  nlohmann::json request(const std::string& method, const std::string& path, const std::string& body);

  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string token_;
  RetryPolicy retry_;
};

class Segmenter {
 public:
  virtual ~Segmenter() = default;
  virtual std::string name() const = 0;
  virtual void begin(const SequenceMeta& meta) = 0;
  /// Scribbles delivered this turn; returns a prediction for every frame.
  virtual std::vector<LabelMask> interact(const ScribbleSet& scribbles) = 0;
};

/// Per-object linear classifiers over a fixed feature map. Features are
/// computed once per sequence; only the classifiers are refit each turn.
///
/// Frames carrying scribbles of object k contribute the full fg / nocare /
/// bg partition for k. Frames with only other labels contribute those
/// scribbles (dilated by B) as bg and nothing else.
class LinearSegmenter : public Segmenter {
 public:
  using FeatureSource = std::function<FeatureMap(const SequenceMeta&)>;

  LinearSegmenter(FeatureSource source, BaselineConfig cfg);
  std::string name() const override { return "linear"; }
  void begin(const SequenceMeta& meta) override;
  std::vector<LabelMask> interact(const ScribbleSet& scribbles) override;

  const FeatureMap& features() const { return features_; }
  int feature_computations() const { return feature_computations_; }

 private:
  FeatureSource source_;
  BaselineConfig cfg_;
  SequenceMeta meta_;
  FeatureMap features_;
  int feature_computations_ = 0;
  std::vector<Scribble> scribbles_;
  std::vector<LabelMask> previous_;
};

/// Returns ground truth; test-only, needs local access to the annotations.
class OracleSegmenter : public Segmenter {
 public:
  using GroundTruthSource = std::function<std::vector<LabelMask>(const std::string& sequence)>;
  explicit OracleSegmenter(GroundTruthSource source);
  std::string name() const override { return "oracle"; }
  void begin(const SequenceMeta& meta) override;
  std::vector<LabelMask> interact(const ScribbleSet& scribbles) override;

 private:
  GroundTruthSource source_;
  std::vector<LabelMask> gt_;
};

/// Paints every scribble received so far, dilated by B, in arrival order.
class StaticSegmenter : public Segmenter {
 public:
  explicit StaticSegmenter(StructuringElement b = StructuringElement::disk(3));
  std::string name() const override { return "static"; }
  void begin(const SequenceMeta& meta) override;
  std::vector<LabelMask> interact(const ScribbleSet& scribbles) override;

 private:
  StructuringElement b_;
  SequenceMeta meta_;
  std::vector<LabelMask> painted_;
};

struct LoopResult {
  std::string session_id;
  std::string sequence;
  int turns = 0;
  bool closed = false;
  nlohmann::json report;
  std::vector<double> segmenter_s;  // measured per turn
};

/// start -> (segment -> submit)* until the server closes the session or
/// max_turns submissions were made. With fixed_compute_s set, offline
/// endpoints are charged that constant instead of the measured time.
LoopResult run_interactive_loop(Endpoint& endpoint, const std::string& sequence, Segmenter& segmenter,
                                int max_turns, std::optional<double> fixed_compute_s = std::nullopt);

}  // namespace ivos
