#pragma once

#include <cstdint>
#include <string>

#include "cmx/problems/linear_auc.hpp"
#include "cmx/types.hpp"

namespace cmx {

// Returns CSV: header row required, first column is a period label and is
// ignored, remaining cells are numeric asset returns. Rows = periods.
Mat load_returns_csv(const std::string& path);

// Instance files carry a 3-line header (kind, seed, dims) followed by flat
// numbers, for reproducibility audits of generated data.
void save_mdp_instance(const std::string& path, std::uint64_t seed, const Mat& transitions,
                       const Mat& rewards);
void load_mdp_instance(const std::string& path, std::uint64_t& seed, Mat& transitions,
                       Mat& rewards);

void save_auc_instance(const std::string& path, std::uint64_t seed, const AucDataset& data);
AucDataset load_auc_instance(const std::string& path, std::uint64_t& seed);

}  // namespace cmx
