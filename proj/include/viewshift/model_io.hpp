#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "viewshift/evaluation.hpp"

namespace viewshift {

/// Trees serialize as nested node objects; leaves carry class counts.
std::string tree_to_json(const DecisionTree& tree);
DecisionTree tree_from_json(std::string_view text);

std::string forest_to_json(const RandomForest& forest);
RandomForest forest_from_json(std::string_view text);

std::string ocsvm_to_json(const OneClassSvm& model);
OneClassSvm ocsvm_from_json(std::string_view text);

std::string cv_report_to_json(const CvReport& report, const std::vector<Importance>& importance = {});

}  // namespace viewshift
