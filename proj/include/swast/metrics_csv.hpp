// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "swast/ablation.hpp"
#include "swast/engine.hpp"
#include "swast/interplay.hpp"

namespace swast {

inline constexpr const char* kMetricsHeader =
    "epoch,ce_loss,sp_loss,total_loss,test_acc,sparsity,coreset_size,noise_frac,selection_event";

/// Real number with 9 significant digits.
std::string format_real(double v);

std::string metrics_csv(const std::vector<EpochMetrics>& series);
void emit_metrics(const std::string& path, const std::vector<EpochMetrics>& series);

std::string idd_csv(const std::vector<IddRow>& rows);
std::string curves_csv(const std::vector<CurvePoint>& curves);
std::string ablation_runs_csv(const AblationTable& table);
std::string ablation_summary_csv(const AblationTable& table);

} // namespace swast
