#pragma once

#include <string>
#include <vector>

#include "volind/config.hpp"

namespace volind {

enum class VerifyLevel { quick, full };

struct PropertyResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifySummary {
    VerifyLevel level = VerifyLevel::quick;
    std::vector<PropertyResult> properties;
    bool all_pass() const;
};

/// Runs the module property suites against `cfg`. `full` adds the lemma diagnostics and a kappa sweep.
VerifySummary run_verify(const LoadedConfig& cfg, VerifyLevel level, int workers);

std::string verify_summary_json(const VerifySummary& summary, const std::string& config_hash);

}  // namespace volind
