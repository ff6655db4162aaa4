// config.hpp: JSON run configuration (model + per-method settings), strict key checking

#pragma once

#include <cstdint>
#include <string>

#include "qfluor/davydov.hpp"
#include "qfluor/heom.hpp"
#include "qfluor/master_eq.hpp"

namespace qfluor {

struct RunConfig {
    ModelConfig model;
    DavydovOptions davydov;
    TlmeOptions tlme;
    HeomOptions heom;
    double sample_dt{0.1}; // shared output grid for every method

    // sample_dt / dt, after checking that it is a positive integer
    int sample_stride() const;
    void validate() const;
    bool operator==(const RunConfig&) const = default;
};

// Parse a JSON document. Unknown sections or keys, wrong types and invariant violations raise
// ConfigError. Missing keys keep their defaults.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Canonical single-line JSON with every key present; parse_config(config_echo(c)) == c.
std::string config_echo(const RunConfig& cfg);

// Documented parameter sets: N_b = 60, M = 4.
void apply_desk_scale(RunConfig& cfg);

} // namespace qfluor
