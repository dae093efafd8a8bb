#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fvss/dataset.hpp"
#include "fvss/probe.hpp"

namespace fvss::eval {

struct ProbeReport {
  std::string dataset;
  SemanticGroup group = SemanticGroup::Instance;
  double top1 = 0.0;  // percent
  double top5 = 0.0;
  bool has_top5 = false;  // reported when the class count is >= 5
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  int probe_epochs = 0;
  std::size_t feature_dim = 0;
};

struct GroupSummary {
  SemanticGroup group = SemanticGroup::Instance;
  std::vector<double> accuracies;
  double average = 0.0;
};

// Arithmetic mean per semantic group, in group declaration order. Throws on
// an empty report set or an empty group request.
double group_average(std::span<const double> accuracies);
std::vector<GroupSummary> summarize_groups(std::span<const ProbeReport> reports);

struct SensitivityReport {
  std::string setting;  // model label, e.g. "gaze_n48"
  double normal_acc = 0.0;
  double missing_background_acc = 0.0;
  double missing_object_acc = 0.0;  // mean over the removal variants
  double delta_background = 0.0;    // variant minus normal
  double delta_object = 0.0;
};

struct VariantSets {
  const LabeledDataset* normal = nullptr;
  const LabeledDataset* missing_background = nullptr;
  std::vector<const LabeledDataset*> missing_object;  // >= 1 removal variant
};

// Accuracy of a trained probe over frozen features of the normal test images
// and every variant; the variant sets must agree item-for-item on labels.
SensitivityReport sensitivity_analysis(const nn::Network& frozen, const LinearProbe& probe,
                                       const VariantSets& variants,
                                       std::span<const std::size_t> test_indices,
                                       const FeatureExtractOptions& options,
                                       const std::string& setting);

// Fig.-style relative improvement of each model's delta over the worst
// model's delta, for the two settings (background, object).
struct RelativeImprovement {
  std::string setting;
  double background = 0.0;
  double object = 0.0;
};
std::vector<RelativeImprovement> relative_improvements(
    std::span<const SensitivityReport> reports);

void write_probe_csv(std::span<const ProbeReport> reports, std::ostream& out);
void write_group_csv(std::span<const GroupSummary> summaries, std::ostream& out);
void write_sensitivity_csv(std::span<const SensitivityReport> reports, std::ostream& out);

}  // namespace fvss::eval
