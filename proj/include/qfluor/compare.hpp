// compare.hpp: agreement metrics between two method outputs

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qfluor/csv.hpp"

namespace qfluor {

struct SpectrumMetrics {
    std::vector<double> omegas;
    std::vector<double> per_mode; // max_t |N_a - N_b| / max(peak_a, peak_b)
    double aggregate{0.0};        // max over modes
};

// Relative L1 difference between N(w_ref + d) and N(w_ref - d) over the modes above w_ref whose
// mirror image lies inside the band; the mirror value is linearly interpolated.
double asymmetry(const std::vector<double>& omegas, const std::vector<double>& n, double omega_ref);

struct ComparisonReport {
    std::string label_a, label_b;
    std::size_t common_times{0};
    double pz_linf{0.0};
    double pz_l2{0.0}; // RMS over the common times
    std::optional<SpectrumMetrics> spectrum;
    double asym_time{0.0};
    double omega_ref{0.0};
    std::optional<double> asymmetry_a, asymmetry_b;

    std::string to_text() const;
};

struct CompareOptions {
    std::optional<double> omega_ref; // default: omega_x from the config echo
    std::optional<double> time;      // default: last common time
};

// Tables as written by the runner: dynamics plus optional spectrum for each side.
ComparisonReport compare_tables(const Table& dyn_a, const Table* spec_a, const Table& dyn_b, const Table* spec_b,
                                const CompareOptions& opts = {});

// a and b are method directories (containing dynamics.csv) or run directories; for run
// directories every method present in both is compared.
std::vector<ComparisonReport> compare_paths(const std::string& a, const std::string& b,
                                            const CompareOptions& opts = {});

} // namespace qfluor
