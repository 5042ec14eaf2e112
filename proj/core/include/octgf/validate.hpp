// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace octgf {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string details;
    double seconds = 0.0;
};

/// Runs one acceptance criterion (1..9). quick = reduced path counts /
/// coarser grids for a fast smoke run; the full run pins every tolerance.
CriterionResult run_criterion(int id, bool quick = false, int threads = 1);

std::vector<CriterionResult> run_all_criteria(bool quick = false, int threads = 1);

std::string criteria_report_json(const std::vector<CriterionResult>& results);

}  // namespace octgf
