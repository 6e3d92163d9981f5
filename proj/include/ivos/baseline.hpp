#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ivos/features.hpp"
#include "ivos/raster.hpp"

namespace ivos {

struct BaselineConfig {
  StructuringElement fg_element = StructuringElement::disk(3);      // B
  StructuringElement nocare_element = StructuringElement::disk(9);  // C, must contain B
  double regularization = 1.0;                                      // SVM cost C
  float bg_threshold = 0.0f;
  bool previous_prediction_nocare = false;
  int max_iterations = 300;
  double tolerance = 1e-6;
  std::size_t max_samples_per_class = 20000;
  std::uint64_t seed = 0;

  void validate() const;
};

/// fg, nocare and bg partition the frame.
struct ScribbleLabels {
  BinaryMask fg;
  BinaryMask nocare;
  BinaryMask bg;
  ObjectId object = 0;
};

/// fg = X dilated by B; nocare = (X dilated by C) minus fg; everything else
/// is bg. Pixels in `others` (other objects' and background scribbles) are
/// forced to bg. With `previous_fg` and the config flag set, previously
/// predicted foreground not covered by a scribble becomes nocare.
ScribbleLabels scribble_to_labels(const BinaryMask& x, const BaselineConfig& cfg, const BinaryMask& others,
                                  ObjectId object, const BinaryMask* previous_fg = nullptr);

/// score(v) = w . v + bias
struct LinearScorer {
  ObjectId object = 0;
  std::vector<float> weights;
  float bias = 0.0f;

  double score(std::span<const float> v) const;
};

struct LabelledFrame {
  int frame = 0;
  ScribbleLabels labels;
};

/// Linear SVM (L2-regularized hinge loss, bias as a constant feature) trained
/// by dual coordinate descent. Class costs are balanced as C * n / (2 n_class).
/// Nocare pixels are skipped; each class is subsampled to
/// max_samples_per_class with the configured seed. Deterministic.
LinearScorer fit_object_classifier(const FeatureMap& features, std::span<const LabelledFrame> frames,
                                   const BaselineConfig& cfg);

/// Raw samples variant used by the above: x is n x dims row-major, y in {-1, +1}.
LinearScorer fit_linear_svm(std::span<const float> x, std::span<const std::int8_t> y, int dims,
                            const BaselineConfig& cfg);

/// Per pixel, the object with the highest score above bg_threshold (ties to
/// the lowest id), else 0. Scored on the feature grid and upsampled.
std::vector<LabelMask> predict_masks(const FeatureMap& features, std::span<const LinearScorer> scorers,
                                     float bg_threshold);

}  // namespace ivos
