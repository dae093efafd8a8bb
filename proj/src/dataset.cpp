#include "fvss/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fvss/errors.hpp"

namespace fvss::eval {

std::string group_name(SemanticGroup group) {
  switch (group) {
    case SemanticGroup::HardCategory: return "hard_category";
    case SemanticGroup::EasyCategory: return "easy_category";
    case SemanticGroup::FineGrained: return "fine_grained";
    case SemanticGroup::Instance: return "instance";
    case SemanticGroup::Scene: return "scene";
  }
  return "unknown";
}

LabeledDataset load_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "index.tsv");
  if (!in) throw UserError("cannot open dataset index in " + dir.string());
  LabeledDataset dataset;
  dataset.dir = dir;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    DatasetItem item;
    std::string split;
    if (!(row >> item.path >> item.label)) throw UserError("malformed index row: " + line);
    if (!(row >> item.background_id)) item.background_id = -1;
    if (row >> split) item.split = split == "train" ? 0 : split == "test" ? 1 : -1;
    dataset.items.push_back(std::move(item));
  }
  return dataset;
}

ImageU8 load_item(const LabeledDataset& dataset, const DatasetItem& item) {
  return read_ppm(dataset.dir / item.path);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> apply_split_rules(
    const DatasetSpec& spec, const LabeledDataset& dataset) {
  std::vector<std::size_t> train, test;
  switch (spec.split_rule) {
    case SplitRule::Provided: {
      for (std::size_t i = 0; i < dataset.items.size(); ++i) {
        if (dataset.items[i].split == 0)
          train.push_back(i);
        else if (dataset.items[i].split == 1)
          test.push_back(i);
        else
          throw UserError(spec.name + ": item without a provided split: " +
                          dataset.items[i].path);
      }
      break;
    }
    case SplitRule::BackgroundDisjoint: {
      std::set<int> ids;
      for (const auto& item : dataset.items) {
        if (item.background_id < 0)
          throw UserError(spec.name + ": background metadata missing for " + item.path);
        ids.insert(item.background_id);
      }
      if (ids.size() < 12)
        throw UserError(spec.name + ": background-disjoint split needs 12 backgrounds, got " +
                        std::to_string(ids.size()));
      // smallest 7 ids train, next 5 test, any further ids unused
      std::vector<int> sorted(ids.begin(), ids.end());
      const std::set<int> train_ids(sorted.begin(), sorted.begin() + 7);
      const std::set<int> test_ids(sorted.begin() + 7, sorted.begin() + 12);
      for (std::size_t i = 0; i < dataset.items.size(); ++i) {
        if (train_ids.count(dataset.items[i].background_id))
          train.push_back(i);
        else if (test_ids.count(dataset.items[i].background_id))
          test.push_back(i);
      }
      break;
    }
    case SplitRule::OnePerClass: {
      std::map<int, std::size_t> first_of_class;
      for (std::size_t i = 0; i < dataset.items.size(); ++i)
        first_of_class.try_emplace(dataset.items[i].label, i);
      for (std::size_t i = 0; i < dataset.items.size(); ++i) {
        if (first_of_class.at(dataset.items[i].label) == i)
          train.push_back(i);
        else
          test.push_back(i);
      }
      break;
    }
  }
  return {train, test};
}

}  // namespace fvss::eval
