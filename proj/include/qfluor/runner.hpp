// runner.hpp: batch execution of the four methods on a shared config and output grid
//
// <out>/manifest.json         request, seed, run ids, per-method status
// <out>/bath.csv              omega,lambda
// <out>/<method>/dynamics.csv t,P_z (davydov adds norm,sigma2)
// <out>/<method>/spectrum.csv N(w_k, t); not written for heom
// <out>/<method>/meta.txt     key = value diagnostics

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qfluor/config.hpp"

namespace qfluor {

inline const std::vector<std::string>& known_methods()
{
    static const std::vector<std::string> m{"davydov", "tlme", "rwa_tlme", "heom"};
    return m;
}

// "davydov,tlme" -> {"davydov", "tlme"}; unknown or duplicate names raise ConfigError.
std::vector<std::string> parse_methods(const std::string& list);

struct MethodStatus {
    std::string method;
    std::string run_id;
    std::string status{"pending"}; // ok | failed
    int exit_code{0};              // 2 config error, 3 numerical failure
    std::string message;
};

struct RunManifest {
    std::string config_path;
    std::vector<std::string> methods;
    std::string out_dir;
    std::uint64_t seed{0};
    std::vector<MethodStatus> status;

    bool ok() const;
    int exit_code() const; // first failing method's code, 0 when all succeeded
};

// 16 hex digits of FNV-1a over (method, config echo).
std::string run_id(const std::string& method, const RunConfig& cfg);

// seed overrides both the davydov noise seed and the OEDF multistart seed.
RunManifest run(RunConfig cfg, const std::string& config_path, const std::vector<std::string>& methods,
                const std::string& out_dir, std::optional<std::uint64_t> seed = std::nullopt);

void write_manifest(const RunManifest& m);
RunManifest read_manifest(const std::string& out_dir);

} // namespace qfluor
