#include "ivos/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "ivos/error.hpp"
#include "ivos/mask_ops.hpp"
#include "ivos/simd/kernels.hpp"

namespace ivos {

void BaselineConfig::validate() const {
  std::set<std::pair<int, int>> cset;
  for (const auto& o : nocare_element.offsets()) cset.insert({o.dx, o.dy});
  for (const auto& o : fg_element.offsets()) {
    if (!cset.count({o.dx, o.dy})) throw Error(ErrorCode::invalid_argument, "nocare element C must contain fg element B");
  }
  if (!(regularization > 0.0)) throw Error(ErrorCode::invalid_argument, "regularization must be > 0");
  if (max_iterations < 1) throw Error(ErrorCode::invalid_argument, "max_iterations must be >= 1");
  if (!(tolerance > 0.0)) throw Error(ErrorCode::invalid_argument, "tolerance must be > 0");
  if (max_samples_per_class < 1) throw Error(ErrorCode::invalid_argument, "max_samples_per_class must be >= 1");
}

ScribbleLabels scribble_to_labels(const BinaryMask& x, const BaselineConfig& cfg, const BinaryMask& others,
                                  ObjectId object, const BinaryMask* previous_fg) {
  cfg.validate();
  if (others.size != x.size || (previous_fg && previous_fg->size != x.size)) {
    throw Error(ErrorCode::size_mismatch, "scribble masks differ in size");
  }
  ScribbleLabels out{dilate(x, cfg.fg_element), dilate(x, cfg.nocare_element), BinaryMask(x.size), object};
  const auto& k = simd::active();
  const std::size_t n = x.size.area();
  k.andnot_into(out.nocare.bits.data(), out.fg.bits.data(), n);
  if (cfg.previous_prediction_nocare && previous_fg) {
    BinaryMask prev = *previous_fg;
    k.andnot_into(prev.bits.data(), out.fg.bits.data(), n);
    k.or_into(out.nocare.bits.data(), prev.bits.data(), n);
  }
  k.andnot_into(out.fg.bits.data(), others.bits.data(), n);
  k.andnot_into(out.nocare.bits.data(), others.bits.data(), n);
  for (std::size_t i = 0; i < n; ++i) out.bg.bits[i] = !out.fg.bits[i] && !out.nocare.bits[i];
  return out;
}

double LinearScorer::score(std::span<const float> v) const {
  if (v.size() != weights.size()) throw Error(ErrorCode::size_mismatch, "feature dimension mismatch");
  double s = bias;
  for (std::size_t d = 0; d < v.size(); ++d) s += static_cast<double>(weights[d]) * v[d];
  return s;
}

LinearScorer fit_linear_svm(std::span<const float> x, std::span<const std::int8_t> y, int dims,
                            const BaselineConfig& cfg) {
  cfg.validate();
  const std::size_t n = y.size();
  const auto D = static_cast<std::size_t>(dims);
  if (dims < 1 || x.size() != n * D) throw Error(ErrorCode::size_mismatch, "sample matrix does not match labels");
  const auto pos = static_cast<std::size_t>(std::count(y.begin(), y.end(), std::int8_t{1}));
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw Error(ErrorCode::invalid_argument, "training needs both foreground and background samples");

  const double c_pos = cfg.regularization * static_cast<double>(n) / (2.0 * static_cast<double>(pos));
  const double c_neg = cfg.regularization * static_cast<double>(n) / (2.0 * static_cast<double>(neg));

  // w has D + 1 entries; the last multiplies the constant bias feature 1.
  std::vector<double> w(D + 1, 0.0);
  std::vector<double> alpha(n, 0.0);
  std::vector<double> qd(n, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < D; ++d) qd[i] += static_cast<double>(x[i * D + d]) * x[i * D + d];

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(cfg.seed);
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    std::shuffle(order.begin(), order.end(), rng);
    double pg_max = -std::numeric_limits<double>::infinity();
    double pg_min = std::numeric_limits<double>::infinity();
    for (const std::size_t i : order) {
      const double yi = y[i];
      const double ci = yi > 0 ? c_pos : c_neg;
      const float* xi = x.data() + i * D;
      double wx = w[D];
      for (std::size_t d = 0; d < D; ++d) wx += w[d] * xi[d];
      const double g = yi * wx - 1.0;
      double pg = g;
      if (alpha[i] == 0.0) pg = std::min(g, 0.0);
      else if (alpha[i] == ci) pg = std::max(g, 0.0);
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (std::abs(pg) > 1e-12) {
        const double old = alpha[i];
        alpha[i] = std::clamp(alpha[i] - g / qd[i], 0.0, ci);
        const double step = (alpha[i] - old) * yi;
        for (std::size_t d = 0; d < D; ++d) w[d] += step * xi[d];
        w[D] += step;
      }
    }
    if (pg_max - pg_min <= cfg.tolerance) break;
  }

  LinearScorer s;
  s.weights.resize(D);
  for (std::size_t d = 0; d < D; ++d) s.weights[d] = static_cast<float>(w[d]);
  s.bias = static_cast<float>(w[D]);
  return s;
}

namespace {

// Grid cells labelled by a pixel mask; several pixels of one cell each add
// a sample, so cells weigh by coverage.
void gather(const FeatureMap& fm, int t, const BinaryMask& mask, std::vector<std::size_t>& cells) {
  for (int y = 0; y < mask.size.height; ++y)
    for (int x = 0; x < mask.size.width; ++x)
      if (mask.at(x, y)) cells.push_back(static_cast<std::size_t>(t) * fm.grid.area() + fm.cell_of(x, y));
}

void subsample(std::vector<std::size_t>& v, std::size_t cap, std::mt19937_64& rng) {
  if (v.size() <= cap) return;
  std::shuffle(v.begin(), v.end(), rng);
  v.resize(cap);
  std::sort(v.begin(), v.end());
}

}  // namespace

LinearScorer fit_object_classifier(const FeatureMap& features, std::span<const LabelledFrame> frames,
                                   const BaselineConfig& cfg) {
  features.validate();
  if (frames.empty()) throw Error(ErrorCode::invalid_argument, "no annotated frames");
  std::vector<std::size_t> fg;
  std::vector<std::size_t> bg;
  const ObjectId object = frames.front().labels.object;
  for (const auto& lf : frames) {
    if (lf.frame < 0 || lf.frame >= features.frames()) throw Error(ErrorCode::invalid_argument, "annotated frame out of range");
    if (lf.labels.fg.size != features.image) throw Error(ErrorCode::size_mismatch, "labels and features differ in size");
    gather(features, lf.frame, lf.labels.fg, fg);
    gather(features, lf.frame, lf.labels.bg, bg);
  }
  std::mt19937_64 rng(cfg.seed);
  subsample(fg, cfg.max_samples_per_class, rng);
  subsample(bg, cfg.max_samples_per_class, rng);

  const auto D = static_cast<std::size_t>(features.dims);
  const std::size_t cells = features.grid.area();
  std::vector<float> x;
  std::vector<std::int8_t> y;
  x.reserve((fg.size() + bg.size()) * D);
  auto push = [&](std::size_t flat, std::int8_t label) {
    const std::size_t t = flat / cells;
    const std::size_t c = flat % cells;
    for (std::size_t d = 0; d < D; ++d) x.push_back(features.data[t][d * cells + c]);
    y.push_back(label);
  };
  for (const std::size_t f : fg) push(f, 1);
  for (const std::size_t b : bg) push(b, -1);
  LinearScorer s = fit_linear_svm(x, y, features.dims, cfg);
  s.object = object;
  return s;
}

std::vector<LabelMask> predict_masks(const FeatureMap& features, std::span<const LinearScorer> scorers,
                                     float bg_threshold) {
  features.validate();
  if (scorers.empty()) throw Error(ErrorCode::invalid_argument, "no scorers");
  std::vector<const LinearScorer*> sorted;
  for (const auto& s : scorers) {
    if (s.weights.size() != static_cast<std::size_t>(features.dims)) {
      throw Error(ErrorCode::size_mismatch, "scorer dimension differs from the features");
    }
    sorted.push_back(&s);
  }
  std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->object < b->object; });

  const auto& k = simd::active();
  const std::size_t cells = features.grid.area();
  std::vector<LabelMask> out;
  std::vector<float> best(cells);
  std::vector<ObjectId> label(cells);
  std::vector<float> score(cells);
  for (int t = 0; t < features.frames(); ++t) {
    std::fill(best.begin(), best.end(), bg_threshold);
    std::fill(label.begin(), label.end(), ObjectId{0});
    for (const LinearScorer* s : sorted) {
      std::fill(score.begin(), score.end(), s->bias);
      for (int d = 0; d < features.dims; ++d) {
        k.axpy_f32(score.data(), s->weights[static_cast<std::size_t>(d)], features.plane(t, d), cells);
      }
      for (std::size_t c = 0; c < cells; ++c) {
        if (score[c] > best[c]) {
          best[c] = score[c];
          label[c] = s->object;
        }
      }
    }
    LabelMask m(features.image);
    for (int y = 0; y < features.image.height; ++y)
      for (int x = 0; x < features.image.width; ++x) m.set(x, y, label[features.cell_of(x, y)]);
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace ivos
