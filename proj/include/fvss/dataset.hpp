#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fvss/image.hpp"

namespace fvss::eval {

// The paper's dataset partition; probe accuracies are averaged per group.
enum class SemanticGroup { HardCategory, EasyCategory, FineGrained, Instance, Scene };

std::string group_name(SemanticGroup group);

// Dataset directory: images plus an `index.tsv` with rows
//   path \t label \t background_id \t split
// where background_id is -1 when absent and split is `train`/`test`/`-`.
struct DatasetItem {
  std::string path;
  int label = 0;
  int background_id = -1;
  int split = -1;  // -1 none, 0 train, 1 test
};

struct LabeledDataset {
  std::filesystem::path dir;
  std::vector<DatasetItem> items;
};

LabeledDataset load_dataset(const std::filesystem::path& dir);
ImageU8 load_item(const LabeledDataset& dataset, const DatasetItem& item);

enum class SplitRule {
  Provided,            // use the split column
  BackgroundDisjoint,  // smallest 7 background ids train, next 5 test
  OnePerClass,         // first image of each class trains, the rest test
};

struct DatasetSpec {
  std::string name;
  SemanticGroup group = SemanticGroup::Instance;
  SplitRule split_rule = SplitRule::Provided;
  bool center_crop_at_eval = true;
};

// Item indices for the probe's train and test sides. Throws UserError when
// the metadata a rule needs is missing (no split column, no background ids,
// fewer than 12 distinct backgrounds for the disjoint rule).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> apply_split_rules(
    const DatasetSpec& spec, const LabeledDataset& dataset);

}  // namespace fvss::eval
