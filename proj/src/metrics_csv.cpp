// SPDX-License-Identifier: Apache-2.0
#include "swast/metrics_csv.hpp"

#include <cstdio>
#include <sstream>

#include "swast/checkpoint.hpp"

namespace swast {

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string metrics_csv(const std::vector<EpochMetrics>& series) {
    std::ostringstream os;
    os << kMetricsHeader << '\n';
    for (const auto& m : series) {
        os << m.epoch << ',' << format_real(m.ce_loss) << ',' << format_real(m.sp_loss) << ','
           << format_real(m.total_loss) << ',' << format_real(m.test_accuracy) << ','
           << format_real(m.scoped_sparsity) << ',' << m.coreset_size << ','
           << (m.coreset_noise_fraction ? format_real(*m.coreset_noise_fraction) : std::string()) << ','
           << (m.selection_event ? 1 : 0) << '\n';
    }
    return os.str();
}

void emit_metrics(const std::string& path, const std::vector<EpochMetrics>& series) {
    write_file_atomic(path, metrics_csv(series));
}

std::string idd_csv(const std::vector<IddRow>& rows) {
    std::ostringstream os;
    os << "degree,idd,floor_activated\n";
    for (const auto& r : rows) os << r.degree << ',' << format_real(r.value) << ',' << (r.floor_activated ? 1 : 0) << '\n';
    return os.str();
}

std::string curves_csv(const std::vector<CurvePoint>& curves) {
    std::ostringstream os;
    os << "x,truth,noisy_fit,noisy_pruned,clean_fit,clean_pruned\n";
    for (const auto& c : curves)
        os << format_real(c.x) << ',' << format_real(c.truth) << ',' << format_real(c.noisy_fit) << ','
           << format_real(c.noisy_pruned) << ',' << format_real(c.clean_fit) << ',' << format_real(c.clean_pruned)
           << '\n';
    return os.str();
}

std::string ablation_runs_csv(const AblationTable& table) {
    std::ostringstream os;
    os << "cell,seed,final_acc,noise_frac,collapses,diverged\n";
    for (const auto& r : table.runs)
        os << r.cell << ',' << r.seed << ',' << format_real(r.final_accuracy) << ','
           << (r.final_noise_fraction ? format_real(*r.final_noise_fraction) : std::string()) << ',' << r.collapses
           << ',' << (r.diverged ? 1 : 0) << '\n';
    return os.str();
}

std::string ablation_summary_csv(const AblationTable& table) {
    std::ostringstream os;
    os << "cell,mean_acc,std_acc,mean_noise_frac,collapses\n";
    for (const auto& s : table.summary)
        os << s.cell << ',' << format_real(s.mean_accuracy) << ',' << format_real(s.std_accuracy) << ','
           << (s.mean_noise_fraction ? format_real(*s.mean_noise_fraction) : std::string()) << ',' << s.collapses
           << '\n';
    return os.str();
}

} // namespace swast
