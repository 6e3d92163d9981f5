// ivos: serve, evaluate offline, generate synthetic data, re-score logs,
// and run the reference client against a server.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "ivos/client.hpp"
#include "ivos/config.hpp"
#include "ivos/error.hpp"
#include "ivos/evaluate.hpp"
#include "ivos/http_server.hpp"
#include "ivos/service.hpp"
#include "ivos/synth.hpp"

namespace fs = std::filesystem;
using namespace ivos;

namespace {

std::atomic<HttpServer*> g_server{nullptr};

void on_signal(int) {
  if (HttpServer* s = g_server.load()) s->stop();
}

struct TrackFlags {
  double budget_rate_s = 5.0;
  double threshold = 0.60;
  double cap_s = 300.0;
  int max_interactions = 8;
};

void add_track_flags(CLI::App* cmd, TrackFlags& t) {
  cmd->add_option("--budget-rate-s", t.budget_rate_s, "Quality-track budget per frame per object")
      ->envname("IVOS_BUDGET_RATE_S")->capture_default_str();
  cmd->add_option("--threshold", t.threshold, "Speed-track quality threshold")
      ->envname("IVOS_THRESHOLD")->capture_default_str();
  cmd->add_option("--cap-s", t.cap_s, "Speed-track time charged to objects that never reach the threshold")
      ->envname("IVOS_CAP_S")->capture_default_str();
  cmd->add_option("--max-interactions", t.max_interactions, "Interactions per session")
      ->envname("IVOS_MAX_INTERACTIONS")->capture_default_str();
}

void apply_tracks(ServiceConfig& cfg, const TrackFlags& t) {
  cfg.tracks.budget_rate_s = t.budget_rate_s;
  cfg.tracks.threshold = t.threshold;
  cfg.tracks.cap_s = t.cap_s;
  cfg.max_interactions = t.max_interactions;
}

void print_summary(const AggregateReport& r) {
  std::printf("%-8s %-12s %10s %10s %12s\n", "session", "sequence", "budget_s", "J&F@budget", "speed_s");
  for (const auto& s : r.sessions) {
    std::printf("%-8s %-12s %10.1f %10.4f %12.2f%s\n", s.session_id.c_str(), s.sequence.c_str(), s.summary.budget_s,
                s.summary.quality_at_budget, s.summary.speed_total_s, s.summary.speed_reached ? "" : " (capped)");
  }
  std::printf("mean quality at budget %.4f, total speed %.2f s over %zu sessions\n", r.mean_quality_at_budget,
              r.total_speed_s, r.sessions.size());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interactive video object segmentation evaluation"};
  app.require_subcommand(1);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the evaluation service");
  std::optional<std::string> config_path;
  std::optional<std::string> serve_dataset, serve_host, serve_log_dir;
  std::optional<int> serve_port;
  serve->add_option("--config", config_path, "key = value config file")->envname("IVOS_CONFIG");
  serve->add_option("--dataset", serve_dataset, "Dataset root (overrides config)");
  serve->add_option("--host", serve_host, "Listen address (overrides config)");
  serve->add_option("--port", serve_port, "Listen port, 0 for any (overrides config)");
  serve->add_option("--log-dir", serve_log_dir, "Session log directory (overrides config)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Run sessions in-process and write reports");
  EvaluateOptions eo;
  TrackFlags eval_tracks;
  std::string eval_dataset;
  std::string eval_out = "ivos-out";
  std::uint64_t eval_seed = 0;
  std::optional<double> fixed_compute;
  std::optional<std::string> features_dir;
  evaluate->add_option("--dataset", eval_dataset, "Dataset root")->required()->envname("IVOS_DATASET");
  evaluate->add_option("--split", eo.split, "Split to evaluate")->envname("IVOS_SPLIT")->capture_default_str();
  evaluate->add_option("--sequence", eo.sequences, "Sequence (repeatable; overrides --split)");
  evaluate->add_option("--segmenter", eo.segmenter, "linear | oracle | static")
      ->envname("IVOS_SEGMENTER")->capture_default_str();
  evaluate->add_option("--seed", eval_seed, "Classifier seed")->envname("IVOS_SEED")->capture_default_str();
  evaluate->add_option("--out", eval_out, "Output directory")->envname("IVOS_OUT")->capture_default_str();
  evaluate->add_option("--fixed-compute-s", fixed_compute,
                       "Charge this many seconds per turn instead of the measured segmenter time");
  evaluate->add_option("--features-dir", features_dir, "Directory of <sequence>.ivfm feature files");
  evaluate->add_option("--jobs", eo.jobs, "Parallel sequences")->capture_default_str();
  add_track_flags(evaluate, eval_tracks);

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic moving-squares dataset");
  SynthSpec spec;
  std::string synth_out;
  std::string motion = "bounce";
  int width = 64, height = 64;
  synth->add_option("--out", synth_out, "Dataset root to create")->required()->envname("IVOS_OUT");
  synth->add_option("--sequences", spec.sequences)->capture_default_str();
  synth->add_option("--frames", spec.frames)->capture_default_str();
  synth->add_option("--width", width)->capture_default_str();
  synth->add_option("--height", height)->capture_default_str();
  synth->add_option("--objects", spec.objects, "1..3")->capture_default_str();
  synth->add_option("--motion", motion, "linear | bounce")->capture_default_str();
  synth->add_option("--seed", spec.seed)->envname("IVOS_SEED")->capture_default_str();
  synth->add_option("--split", spec.split)->capture_default_str();

  // report
  auto* report = app.add_subcommand("report", "Re-score session logs");
  std::vector<std::string> log_files;
  std::string report_out = "ivos-report";
  report->add_option("logs", log_files, "Session logs (.jsonl) or directories of them")->required();
  report->add_option("--out", report_out, "Output directory")->envname("IVOS_OUT")->capture_default_str();

  // client
  auto* client = app.add_subcommand("client", "Run the reference client against a server");
  std::string server = "127.0.0.1:8080";
  std::string token;
  std::string client_dataset;
  std::vector<std::string> client_seqs;
  std::string client_split = "val";
  std::string client_segmenter = "linear";
  std::uint64_t client_seed = 0;
  int client_turns = 64;
  client->add_option("--server", server, "host:port")->envname("IVOS_SERVER")->capture_default_str();
  client->add_option("--token", token, "Participant token")->required()->envname("IVOS_TOKEN");
  client->add_option("--dataset", client_dataset, "Local dataset root (images; annotations only for oracle)")
      ->required()->envname("IVOS_DATASET");
  client->add_option("--sequence", client_seqs, "Sequence (repeatable; overrides --split)");
  client->add_option("--split", client_split)->envname("IVOS_SPLIT")->capture_default_str();
  client->add_option("--segmenter", client_segmenter, "linear | oracle | static")
      ->envname("IVOS_SEGMENTER")->capture_default_str();
  client->add_option("--seed", client_seed)->envname("IVOS_SEED")->capture_default_str();
  client->add_option("--max-turns", client_turns, "Safety cap on submissions")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) {
      std::map<std::string, std::string> flags;
      if (serve_dataset) flags["dataset"] = *serve_dataset;
      if (serve_host) flags["listen_host"] = *serve_host;
      if (serve_port) flags["port"] = std::to_string(*serve_port);
      if (serve_log_dir) flags["log_dir"] = *serve_log_dir;
      const ServiceConfig cfg =
          load_service_config(config_path ? std::optional<fs::path>(*config_path) : std::nullopt, flags);
      auto repo = std::make_shared<const DatasetRepository>(load_manifest(cfg.dataset));
      EvaluationService service(cfg, repo);
      HttpServer http(service, [](const std::string& line) { std::fprintf(stderr, "%s\n", line.c_str()); });
      const int port = http.bind(cfg.listen_host, cfg.port);
      std::fprintf(stderr, "ivos: serving %zu sequences on %s:%d, logs in %s\n", repo->manifest().sequences.size(),
                   cfg.listen_host.c_str(), port, cfg.log_dir.string().c_str());
      g_server.store(&http);
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      http.serve();
      g_server.store(nullptr);
      return 0;
    }
    if (*evaluate) {
      eo.dataset = eval_dataset;
      eo.out = eval_out;
      eo.fixed_compute_s = fixed_compute;
      if (features_dir) eo.features_dir = fs::path(*features_dir);
      eo.baseline.seed = eval_seed;
      ServiceConfig cfg;
      apply_config(cfg, env_overrides());
      apply_tracks(cfg, eval_tracks);
      cfg.dataset = eo.dataset;
      cfg.validate();
      eo.service = cfg;
      const EvaluateResult r = run_offline_evaluation(eo);
      print_summary(r.aggregate);
      std::printf("reports written to %s\n", eo.out.string().c_str());
      return 0;
    }
    if (*synth) {
      spec.size = RasterSize(width, height);
      if (motion == "linear") spec.motion = Motion::linear;
      else if (motion == "bounce") spec.motion = Motion::bounce;
      else throw Error(ErrorCode::invalid_argument, "unknown motion '" + motion + "' (linear, bounce)");
      write_synth_dataset(spec, synth_out);
      std::printf("wrote %d sequences of %d frames to %s\n", spec.sequences, spec.frames, synth_out.c_str());
      return 0;
    }
    if (*report) {
      std::vector<fs::path> logs;
      for (const auto& p : log_files) {
        if (fs::is_directory(p)) {
          std::vector<fs::path> found;
          for (const auto& e : fs::directory_iterator(p)) {
            if (e.path().extension() == ".jsonl") found.push_back(e.path());
          }
          std::sort(found.begin(), found.end());
          logs.insert(logs.end(), found.begin(), found.end());
        } else {
          logs.emplace_back(p);
        }
      }
      const AggregateReport r = report_from_logs(logs, report_out);
      print_summary(r);
      return 0;
    }
    if (*client) {
      const auto colon = server.rfind(':');
      if (colon == std::string::npos) throw Error(ErrorCode::invalid_argument, "--server must be host:port");
      const std::string host = server.substr(0, colon);
      const int port = std::stoi(server.substr(colon + 1));
      // The local repository is only read for images (and, for the oracle, annotations).
      const DatasetRepository repo(load_manifest(client_dataset));
      if (client_seqs.empty()) client_seqs = repo.manifest().split(client_split);
      HttpEndpoint endpoint(host, port, token);
      BaselineConfig baseline;
      baseline.seed = client_seed;
      for (const auto& seq : client_seqs) {
        auto seg = make_segmenter(client_segmenter, repo, baseline, std::nullopt);
        const LoopResult r = run_interactive_loop(endpoint, seq, *seg, client_turns);
        std::printf("%s %s: %d turns, %s", r.session_id.c_str(), seq.c_str(), r.turns,
                    r.closed ? "closed" : "open");
        if (r.closed) {
          std::printf(", J&F@budget %.4f, speed %.2f s", r.report.value("quality_at_budget", 0.0),
                      r.report.value("speed_total_s", 0.0));
        }
        std::printf("\n");
      }
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "ivos: %s error: %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ivos: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
