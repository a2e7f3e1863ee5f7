#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>

#include "codemix/corpus.hpp"

namespace codemix {

/// counts[gold][predicted], canonical label indices.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kNumLabels>, kNumLabels> counts{};

  std::size_t total() const;
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Throws DataError on length mismatch or empty input.
ConfusionMatrix confusion(std::span<const Label> golds,
                          std::span<const Label> preds);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  double accuracy = 0.0;
  std::array<ClassScores, kNumLabels> per_class{};
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  std::array<std::size_t, kNumLabels> support{};
};

/// Undefined precision, recall or F1 (zero denominator) is reported as 0.
MetricsReport report(const ConfusionMatrix& cm);

/// Human-readable table of per-class scores and the confusion matrix.
void write_table(const MetricsReport& r, const ConfusionMatrix& cm,
                 std::ostream& out);
/// name=value lines, six fractional digits.
void write_key_values(const MetricsReport& r, std::ostream& out);

}  // namespace codemix
