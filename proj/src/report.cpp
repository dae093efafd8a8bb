#include "fvss/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace fvss::eval {

double group_average(std::span<const double> accuracies) {
  if (accuracies.empty()) throw std::invalid_argument("empty semantic group");
  double sum = 0.0;
  for (const double a : accuracies) sum += a;
  return sum / static_cast<double>(accuracies.size());
}

std::vector<GroupSummary> summarize_groups(std::span<const ProbeReport> reports) {
  if (reports.empty()) throw std::invalid_argument("no probe reports to summarize");
  std::vector<GroupSummary> out;
  for (const SemanticGroup group :
       {SemanticGroup::HardCategory, SemanticGroup::EasyCategory, SemanticGroup::FineGrained,
        SemanticGroup::Instance, SemanticGroup::Scene}) {
    GroupSummary summary;
    summary.group = group;
    for (const ProbeReport& r : reports)
      if (r.group == group) summary.accuracies.push_back(r.top1);
    if (summary.accuracies.empty()) continue;
    summary.average = group_average(summary.accuracies);
    out.push_back(std::move(summary));
  }
  return out;
}

SensitivityReport sensitivity_analysis(const nn::Network& frozen, const LinearProbe& probe,
                                       const VariantSets& variants,
                                       std::span<const std::size_t> test_indices,
                                       const FeatureExtractOptions& options,
                                       const std::string& setting) {
  if (!variants.normal || !variants.missing_background || variants.missing_object.empty())
    throw std::invalid_argument("sensitivity analysis needs normal, missing-background, and "
                                "at least one missing-object set");
  auto check_aligned = [&](const LabeledDataset& other) {
    if (other.items.size() != variants.normal->items.size())
      throw std::invalid_argument("variant size mismatch with the normal set");
    for (const std::size_t i : test_indices)
      if (other.items[i].label != variants.normal->items[i].label)
        throw std::invalid_argument("variant label mismatch at " + other.items[i].path);
  };
  check_aligned(*variants.missing_background);
  for (const LabeledDataset* set : variants.missing_object) check_aligned(*set);

  auto accuracy = [&](const LabeledDataset& set) {
    const FeatureMatrix features = extract_features(frozen, set, test_indices, options);
    return probe.top1_accuracy(features);
  };

  SensitivityReport report;
  report.setting = setting;
  report.normal_acc = accuracy(*variants.normal);
  report.missing_background_acc = accuracy(*variants.missing_background);
  double object_sum = 0.0;
  for (const LabeledDataset* set : variants.missing_object) object_sum += accuracy(*set);
  report.missing_object_acc = object_sum / static_cast<double>(variants.missing_object.size());
  report.delta_background = report.missing_background_acc - report.normal_acc;
  report.delta_object = report.missing_object_acc - report.normal_acc;
  return report;
}

std::vector<RelativeImprovement> relative_improvements(
    std::span<const SensitivityReport> reports) {
  if (reports.empty()) return {};
  double worst_bg = reports[0].delta_background, worst_obj = reports[0].delta_object;
  for (const auto& r : reports) {
    worst_bg = std::min(worst_bg, r.delta_background);
    worst_obj = std::min(worst_obj, r.delta_object);
  }
  std::vector<RelativeImprovement> out;
  for (const auto& r : reports)
    out.push_back({r.setting, r.delta_background - worst_bg, r.delta_object - worst_obj});
  return out;
}

namespace {

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

void write_probe_csv(std::span<const ProbeReport> reports, std::ostream& out) {
  out << "dataset,group,top1,top5,n_train,n_test\n";
  for (const auto& r : reports) {
    out << r.dataset << "," << group_name(r.group) << "," << fixed3(r.top1) << ",";
    if (r.has_top5) out << fixed3(r.top5);
    out << "," << r.n_train << "," << r.n_test << "\n";
  }
}

void write_group_csv(std::span<const GroupSummary> summaries, std::ostream& out) {
  out << "group,average\n";
  for (const auto& s : summaries)
    out << group_name(s.group) << "," << fixed3(s.average) << "\n";
}

void write_sensitivity_csv(std::span<const SensitivityReport> reports, std::ostream& out) {
  out << "setting,normal,missing_bg,missing_obj,delta_bg,delta_obj\n";
  for (const auto& r : reports)
    out << r.setting << "," << fixed3(r.normal_acc) << "," << fixed3(r.missing_background_acc)
        << "," << fixed3(r.missing_object_acc) << "," << fixed3(r.delta_background) << ","
        << fixed3(r.delta_object) << "\n";
}

}  // namespace fvss::eval
