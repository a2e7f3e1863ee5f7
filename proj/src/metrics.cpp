#include "codemix/metrics.hpp"

#include <cstdio>
#include <ostream>

#include "codemix/error.hpp"

namespace codemix {

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto& row : counts) {
    for (std::size_t c : row) t += c;
  }
  return t;
}

ConfusionMatrix confusion(std::span<const Label> golds, std::span<const Label> preds) {
  if (golds.size() != preds.size()) {
    throw DataError("confusion: " + std::to_string(golds.size()) + " gold labels vs " +
                    std::to_string(preds.size()) + " predictions");
  }
  if (golds.empty()) throw DataError("confusion: no examples");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    ++cm.counts[index_of(golds[i])][index_of(preds[i])];
  }
  return cm;
}

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace

MetricsReport report(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (total == 0) throw DataError("metrics: empty confusion matrix");
  MetricsReport r;
  std::size_t correct = 0;
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    std::size_t gold_c = 0, pred_c = 0;
    for (std::size_t k = 0; k < kNumLabels; ++k) {
      gold_c += cm.counts[c][k];
      pred_c += cm.counts[k][c];
    }
    const double tp = static_cast<double>(cm.counts[c][c]);
    correct += cm.counts[c][c];
    ClassScores& s = r.per_class[c];
    s.precision = ratio(tp, static_cast<double>(pred_c));
    s.recall = ratio(tp, static_cast<double>(gold_c));
    s.f1 = ratio(2.0 * s.precision * s.recall, s.precision + s.recall);
    r.support[c] = gold_c;
  }
  const double n = static_cast<double>(total);
  r.accuracy = static_cast<double>(correct) / n;
  double weighted = 0.0, macro = 0.0;
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    macro += r.per_class[c].f1;
    weighted += static_cast<double>(r.support[c]) * r.per_class[c].f1;
  }
  r.macro_f1 = macro / static_cast<double>(kNumLabels);
  r.weighted_f1 = weighted / n;
  return r;
}

namespace {

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

void write_table(const MetricsReport& r, const ConfusionMatrix& cm, std::ostream& out) {
  char line[128];
  out << "class       precision  recall     f1         support\n";
  for (Label l : kAllLabels) {
    const auto& s = r.per_class[index_of(l)];
    std::snprintf(line, sizeof(line), "%-10s  %-9s  %-9s  %-9s  %zu\n",
                  std::string(to_string(l)).c_str(), fixed6(s.precision).c_str(),
                  fixed6(s.recall).c_str(), fixed6(s.f1).c_str(), r.support[index_of(l)]);
    out << line;
  }
  out << "accuracy    " << fixed6(r.accuracy) << '\n'
      << "macro_f1    " << fixed6(r.macro_f1) << '\n'
      << "weighted_f1 " << fixed6(r.weighted_f1) << '\n'
      << "\nconfusion (rows gold, columns predicted)\n"
      << "            negative   neutral    positive\n";
  for (Label g : kAllLabels) {
    const auto& row = cm.counts[index_of(g)];
    std::snprintf(line, sizeof(line), "%-10s  %-9zu  %-9zu  %zu\n",
                  std::string(to_string(g)).c_str(), row[0], row[1], row[2]);
    out << line;
  }
}

void write_key_values(const MetricsReport& r, std::ostream& out) {
  out << "accuracy=" << fixed6(r.accuracy) << '\n'
      << "macro_f1=" << fixed6(r.macro_f1) << '\n'
      << "weighted_f1=" << fixed6(r.weighted_f1) << '\n';
  for (Label l : kAllLabels) {
    const std::string name(to_string(l));
    const auto& s = r.per_class[index_of(l)];
    out << "precision_" << name << '=' << fixed6(s.precision) << '\n'
        << "recall_" << name << '=' << fixed6(s.recall) << '\n'
        << "f1_" << name << '=' << fixed6(s.f1) << '\n'
        << "support_" << name << '=' << r.support[index_of(l)] << '\n';
  }
}

}  // namespace codemix
