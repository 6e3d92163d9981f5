#include "ivos/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <thread>

#include "ivos/error.hpp"
#include "ivos/service.hpp"
#include "ivos/session_log.hpp"

namespace fs = std::filesystem;

namespace ivos {

namespace {

// Each worker thread drives its sessions sequentially, so a per-thread
// virtual clock is consistent for every session it touches.
thread_local double t_virtual_now = 0.0;

class OfflineEndpoint : public ServiceEndpoint {
 public:
  using ServiceEndpoint::ServiceEndpoint;
  void charge_compute(double seconds) override { t_virtual_now += seconds; }
};

}  // namespace

std::unique_ptr<Segmenter> make_segmenter(const std::string& name, const DatasetRepository& repo,
                                          const BaselineConfig& baseline,
                                          const std::optional<fs::path>& features_dir) {
  if (name == "oracle") {
    return std::make_unique<OracleSegmenter>([&repo](const std::string& seq) { return *repo.ground_truth(seq); });
  }
  if (name == "static") return std::make_unique<StaticSegmenter>(baseline.fg_element);
  if (name == "linear") {
    return std::make_unique<LinearSegmenter>(
        [&repo, features_dir](const SequenceMeta& meta) {
          if (features_dir) return load_feature_file(*features_dir / (meta.sequence + ".ivfm"));
          const auto images = repo.images(meta.sequence);
          return default_features(images);
        },
        baseline);
  }
  throw Error(ErrorCode::invalid_argument, "unknown segmenter '" + name + "' (linear, oracle, static)");
}

void write_report_files(const AggregateReport& report, const fs::path& out) {
  fs::create_directories(out);
  {
    std::ofstream f(out / "curve.csv", std::ios::trunc);
    write_curve_csv(f, report);
    if (!f) throw Error(ErrorCode::io, "cannot write " + (out / "curve.csv").string());
  }
  {
    std::ofstream f(out / "tracks.csv", std::ios::trunc);
    write_track_csv(f, report);
    if (!f) throw Error(ErrorCode::io, "cannot write " + (out / "tracks.csv").string());
  }
  nlohmann::json sessions = nlohmann::json::array();
  for (const auto& s : report.sessions) {
    sessions.push_back({{"session_id", s.session_id},
                        {"sequence", s.sequence},
                        {"quality_at_budget", s.summary.quality_at_budget},
                        {"budget_s", s.summary.budget_s},
                        {"speed_total_s", s.summary.speed_total_s},
                        {"speed_reached", s.summary.speed_reached}});
  }
  const nlohmann::json summary = {{"mean_quality_at_budget", report.mean_quality_at_budget},
                                  {"total_speed_s", report.total_speed_s},
                                  {"sessions", std::move(sessions)}};
  std::ofstream f(out / "summary.json", std::ios::trunc);
  f << summary.dump(2) << '\n';
  if (!f) throw Error(ErrorCode::io, "cannot write " + (out / "summary.json").string());
}

EvaluateResult run_offline_evaluation(const EvaluateOptions& opts) {
  auto repo = std::make_shared<const DatasetRepository>(load_manifest(opts.dataset));
  std::vector<std::string> seqs = opts.sequences;
  if (seqs.empty()) seqs = repo->manifest().split(opts.split);
  if (seqs.empty()) throw Error(ErrorCode::invalid_argument, "no sequences to evaluate");
  for (const auto& s : seqs) repo->manifest().sequence(s);
  make_segmenter(opts.segmenter, *repo, opts.baseline, opts.features_dir);  // validate the name up front

  const fs::path log_dir = opts.out / "sessions";
  if (fs::exists(log_dir)) fs::remove_all(log_dir);
  ServiceConfig sc = opts.service;
  sc.dataset = opts.dataset;
  sc.log_dir = log_dir;
  sc.tokens.clear();
  sc.quota = 0;
  EvaluationService service(sc, repo, [] { return t_virtual_now; });

  // Ids are reserved in sequence order so the output does not depend on
  // thread scheduling: worker i waits for its turn to call start.
  EvaluateResult result;
  result.loops.resize(seqs.size());
  std::atomic<std::size_t> next{0};
  std::mutex start_mu;
  std::condition_variable start_cv;
  std::size_t start_turn = 0;
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= seqs.size()) return;
      try {
        t_virtual_now = 0.0;
        auto seg = make_segmenter(opts.segmenter, *repo, opts.baseline, opts.features_dir);
        OfflineEndpoint endpoint(service, "offline");
        struct Ordered : Endpoint {
          Endpoint& inner;
          std::mutex& mu;
          std::condition_variable& cv;
          std::size_t& turn;
          std::size_t mine;
          Ordered(Endpoint& e, std::mutex& m, std::condition_variable& c, std::size_t& t, std::size_t i)
              : inner(e), mu(m), cv(c), turn(t), mine(i) {}
          StartResult start(const std::string& s) override {
            std::unique_lock lock(mu);
            cv.wait(lock, [&] { return turn >= mine; });
            auto r = inner.start(s);
            ++turn;
            cv.notify_all();
            return r;
          }
          TurnResult submit(const std::string& id, std::span<const LabelMask> m) override { return inner.submit(id, m); }
          void charge_compute(double s) override { inner.charge_compute(s); }
        } ordered(endpoint, start_mu, start_cv, start_turn, i);
        result.loops[i] = run_interactive_loop(ordered, seqs[i], *seg, sc.max_interactions, opts.fixed_compute_s);
      } catch (...) {
        {
          std::lock_guard lock(start_mu);
          start_turn = std::max(start_turn, i + 1);
        }
        start_cv.notify_all();
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int jobs = std::clamp(opts.jobs, 1, static_cast<int>(seqs.size()));
  std::vector<std::thread> threads;
  for (int j = 1; j < jobs; ++j) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<fs::path> logs;
  for (const auto& loop : result.loops) logs.push_back(log_dir / (loop.session_id + ".jsonl"));
  result.aggregate = report_from_logs(logs, opts.out);
  return result;
}

AggregateReport report_from_logs(const std::vector<fs::path>& logs, const fs::path& out) {
  if (logs.empty()) throw Error(ErrorCode::invalid_argument, "no session logs given");
  std::vector<SessionReport> reports;
  for (const auto& p : logs) {
    const SessionLog log = read_session_log(p);
    if (!log.closed()) throw Error(ErrorCode::format, p.string() + ": session was never closed");
    reports.push_back(report_from_log(log));
  }
  const AggregateReport agg = aggregate_report(reports);
  if (!out.empty()) write_report_files(agg, out);
  return agg;
}

}  // namespace ivos
