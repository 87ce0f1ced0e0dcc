#pragma once

#include "options.hpp"

#include <nlohmann/json.hpp>

#include <vector>

namespace sard::cli {

std::vector<OptionSpec> simulate_options();
std::vector<OptionSpec> build_dataset_options();
std::vector<OptionSpec> train_options();
std::vector<OptionSpec> despeckle_options();
std::vector<OptionSpec> evaluate_options();
std::vector<OptionSpec> compare_options();

int run_simulate(const nlohmann::json& cfg);
int run_build_dataset(const nlohmann::json& cfg);
int run_train(const nlohmann::json& cfg);
int run_despeckle(const nlohmann::json& cfg);
int run_evaluate(const nlohmann::json& cfg);
int run_compare(const nlohmann::json& cfg);

} // namespace sard::cli
