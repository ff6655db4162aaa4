// plots.hpp: standalone matplotlib scripts for a finished run (nothing is rendered here)

#pragma once

#include <string>
#include <vector>

namespace qfluor {

// Writes scripts into <run>/plots/ and returns their paths. Single-method davydov runs get
// dynamics.py, deviation.py and spectrum.py (heatmap + cuts); runs with several methods get one
// overlay script per observable (pz_overlay.py, spectrum_overlay.py) plus deviation.py and a
// heatmap when davydov is present. Missing CSVs raise ConfigError.
std::vector<std::string> emit_plots(const std::string& run_dir);

} // namespace qfluor
