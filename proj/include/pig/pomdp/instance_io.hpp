#pragma once

#include <filesystem>
#include <string>

#include "pig/pomdp/model.hpp"

// JSON instance files. Keys: states, actions, observations, P[s][a][s'],
// O[s'][a][z], R[s][a], C[i][s][a], budgets, gamma, b0.
namespace pig::pomdp {

std::string to_json_text(const TabularCPOMDP& model, int indent = 1);
TabularCPOMDP from_json_text(const std::string& text);

void save_instance(const TabularCPOMDP& model, const std::filesystem::path& path);
TabularCPOMDP load_instance(const std::filesystem::path& path);

} // namespace pig::pomdp
