#include "ivos/client.hpp"

#include <chrono>
#include <map>
#include <thread>

#include "httplib.h"
#include "ivos/error.hpp"
#include "ivos/mask_ops.hpp"
#include "ivos/scribble_io.hpp"
#include "ivos/service.hpp"
#include "ivos/wire.hpp"

namespace ivos {

using nlohmann::json;

StartResult parse_start_response(const json& j) {
  try {
    StartResult r;
    r.meta.session_id = j.at("session_id").get<std::string>();
    r.meta.sequence = j.at("sequence").get<std::string>();
    r.meta.frames = j.at("frames").get<int>();
    r.meta.size = RasterSize(j.at("width").get<int>(), j.at("height").get<int>());
    r.meta.objects = j.at("objects").get<std::vector<ObjectId>>();
    r.scribbles = scribbles_from_json(j.at("scribbles"), ScribbleKind::human);
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::format, std::string("bad start response: ") + e.what());
  }
}

TurnResult parse_turn_response(const json& j) {
  TurnResult t;
  if (j.contains("report")) {
    t.closed = true;
    t.report = j["report"];
  } else if (j.contains("scribbles")) {
    t.scribbles = scribbles_from_json(j["scribbles"], ScribbleKind::simulated);
  } else {
    throw Error(ErrorCode::format, "prediction response has neither scribbles nor report");
  }
  return t;
}

ServiceEndpoint::ServiceEndpoint(EvaluationService& service, std::string token)
    : service_(service), token_(std::move(token)) {}

StartResult ServiceEndpoint::start(const std::string& sequence) {
  return parse_start_response(service_.start(token_, {{"sequence", sequence}}));
}

TurnResult ServiceEndpoint::submit(const std::string& session_id, std::span<const LabelMask> masks) {
  std::vector<ObjectId> ids;
  for (int v = 1; v <= kMaxObjectId; ++v) ids.push_back(static_cast<ObjectId>(v));
  return parse_turn_response(service_.submit(token_, session_id, encode_prediction(masks, ids)));
}

struct HttpEndpoint::Impl {
  httplib::Client client;
  Impl(const std::string& host, int port) : client(host, port) {
    client.set_connection_timeout(5);
    client.set_read_timeout(120);
    client.set_write_timeout(120);
  }
};

HttpEndpoint::HttpEndpoint(std::string host, int port, std::string token, RetryPolicy retry)
    : impl_(std::make_unique<Impl>(host, port)), token_(std::move(token)), retry_(retry) {}

HttpEndpoint::~HttpEndpoint() = default;

json HttpEndpoint::request(const std::string& method, const std::string& path, const std::string& body) {
  const httplib::Headers headers{{"X-Ivos-Token", token_}};
  int backoff = retry_.initial_backoff_ms;
  std::string last_error;
  for (int attempt = 0; attempt < std::max(1, retry_.attempts); ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      backoff = std::min(backoff * 2, retry_.max_backoff_ms);
    }
    const auto res = method == "GET" ? impl_->client.Get(path, headers)
                                     : impl_->client.Post(path, headers, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    json j;
    try {
      j = json::parse(res->body);
    } catch (const json::parse_error&) {
      throw Error(ErrorCode::format, method + " " + path + ": response is not JSON (status " +
                                         std::to_string(res->status) + ")");
    }
    if (res->status != 200) {
      const std::string code = j.value("code", "internal");
      throw Error(error_code_from_wire(code), method + " " + path + ": " + code + ": " + j.value("message", ""));
    }
    return j;
  }
  throw Error(ErrorCode::io, method + " " + path + ": transport failed after " + std::to_string(retry_.attempts) +
                                 " attempts: " + last_error);
}

StartResult HttpEndpoint::start(const std::string& sequence) {
  return parse_start_response(request("POST", "/session", json{{"sequence", sequence}}.dump()));
}

TurnResult HttpEndpoint::submit(const std::string& session_id, std::span<const LabelMask> masks) {
  std::vector<ObjectId> ids;
  for (int v = 1; v <= kMaxObjectId; ++v) ids.push_back(static_cast<ObjectId>(v));
  return parse_turn_response(
      request("POST", "/session/" + session_id + "/prediction", encode_prediction(masks, ids).dump()));
}

json HttpEndpoint::report(const std::string& session_id) {
  return request("GET", "/session/" + session_id + "/report", "");
}

namespace {

void check_scribbles(const ScribbleSet& set, const SequenceMeta& meta) {
  for (const auto& s : set.scribbles) {
    if (s.frame < 0 || s.frame >= meta.frames) throw Error(ErrorCode::format, "scribble frame out of range");
  }
}

}  // namespace

LinearSegmenter::LinearSegmenter(FeatureSource source, BaselineConfig cfg)
    : source_(std::move(source)), cfg_(std::move(cfg)) {
  cfg_.validate();
}

void LinearSegmenter::begin(const SequenceMeta& meta) {
  meta_ = meta;
  scribbles_.clear();
  previous_.clear();
  features_ = source_(meta);
  ++feature_computations_;
  features_.validate();
  if (features_.image != meta.size || features_.frames() != meta.frames) {
    throw Error(ErrorCode::size_mismatch, "feature map does not match sequence " + meta.sequence);
  }
}

std::vector<LabelMask> LinearSegmenter::interact(const ScribbleSet& scribbles) {
  check_scribbles(scribbles, meta_);
  scribbles_.insert(scribbles_.end(), scribbles.scribbles.begin(), scribbles.scribbles.end());

  // Thickness-1 rasters per (frame, label).
  std::map<int, std::map<ObjectId, BinaryMask>> rasters;
  for (const auto& s : scribbles_) {
    auto [it, fresh] = rasters[s.frame].try_emplace(s.object_label, BinaryMask(meta_.size));
    const BinaryMask r = rasterize_polyline(s.path, meta_.size, 1);
    for (std::size_t i = 0; i < r.bits.size(); ++i) it->second.bits[i] |= r.bits[i];
  }

  std::vector<LinearScorer> scorers;
  for (const ObjectId k : meta_.objects) {
    std::vector<LabelledFrame> frames;
    for (const auto& [f, by_label] : rasters) {
      BinaryMask others(meta_.size);
      for (const auto& [label, r] : by_label) {
        if (label == k) continue;
        for (std::size_t i = 0; i < r.bits.size(); ++i) others.bits[i] |= r.bits[i];
      }
      others = dilate(others, cfg_.fg_element);
      const auto own = by_label.find(k);
      if (own != by_label.end()) {
        std::optional<BinaryMask> prev;
        if (!previous_.empty()) prev = extract_object(previous_[static_cast<std::size_t>(f)], k);
        frames.push_back({f, scribble_to_labels(own->second, cfg_, others, k, prev ? &*prev : nullptr)});
      } else if (!others.empty()) {
        ScribbleLabels l{BinaryMask(meta_.size), BinaryMask(meta_.size), others, k};
        for (std::size_t i = 0; i < others.bits.size(); ++i) l.nocare.bits[i] = !others.bits[i];
        frames.push_back({f, std::move(l)});
      }
    }
    if (frames.empty()) continue;
    try {
      scorers.push_back(fit_object_classifier(features_, frames, cfg_));
      scorers.back().object = k;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::invalid_argument) throw;  // single-class supervision: object not predicted
    }
  }
  if (scorers.empty()) {
    previous_.assign(static_cast<std::size_t>(meta_.frames), LabelMask(meta_.size));
  } else {
    previous_ = predict_masks(features_, scorers, cfg_.bg_threshold);
  }
  return previous_;
}

OracleSegmenter::OracleSegmenter(GroundTruthSource source) : source_(std::move(source)) {}

void OracleSegmenter::begin(const SequenceMeta& meta) {
  gt_ = source_(meta.sequence);
  if (static_cast<int>(gt_.size()) != meta.frames) throw Error(ErrorCode::size_mismatch, "oracle frame count differs");
}

std::vector<LabelMask> OracleSegmenter::interact(const ScribbleSet&) { return gt_; }

StaticSegmenter::StaticSegmenter(StructuringElement b) : b_(b) {}

void StaticSegmenter::begin(const SequenceMeta& meta) {
  meta_ = meta;
  painted_.assign(static_cast<std::size_t>(meta.frames), LabelMask(meta.size));
}

std::vector<LabelMask> StaticSegmenter::interact(const ScribbleSet& scribbles) {
  check_scribbles(scribbles, meta_);
  for (const auto& s : scribbles.scribbles) {
    const BinaryMask r = dilate(rasterize_polyline(s.path, meta_.size, 1), b_);
    LabelMask& m = painted_[static_cast<std::size_t>(s.frame)];
    for (std::size_t i = 0; i < r.bits.size(); ++i) {
      if (r.bits[i]) m.labels[i] = s.object_label;
    }
  }
  return painted_;
}

LoopResult run_interactive_loop(Endpoint& endpoint, const std::string& sequence, Segmenter& segmenter, int max_turns,
                                std::optional<double> fixed_compute_s) {
  if (max_turns < 1) throw Error(ErrorCode::invalid_argument, "max_turns must be >= 1");
  StartResult start = endpoint.start(sequence);
  LoopResult out;
  out.session_id = start.meta.session_id;
  out.sequence = start.meta.sequence;
  segmenter.begin(start.meta);
  ScribbleSet pending = std::move(start.scribbles);
  while (out.turns < max_turns) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<LabelMask> masks = segmenter.interact(pending);
    const double spent = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.segmenter_s.push_back(spent);
    endpoint.charge_compute(fixed_compute_s.value_or(spent));
    TurnResult turn = endpoint.submit(out.session_id, masks);
    ++out.turns;
    if (turn.closed) {
      out.closed = true;
      out.report = std::move(turn.report);
      break;
    }
    pending = std::move(turn.scribbles);
  }
  return out;
}

}  // namespace ivos
