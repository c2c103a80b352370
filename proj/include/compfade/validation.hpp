#pragma once

#include "json.hpp"

#include <string>
#include <vector>

namespace compfade::validation {

enum class Level { quick, full };

struct CheckResult {
    int criterion = 0;
    std::string name;
    bool passed = false;
    double measured = 0.0;   ///< worst error (or statistic) seen
    double tolerance = 0.0;
    std::string detail;      ///< where the worst value occurred, or the failure
};

struct Options {
    Level level = Level::full;
    /// Replace the shadow-kernel evaluator by one with the sign of p flipped.
    /// Used to confirm the series checks notice a broken kernel.
    bool inject_kernel_sign_fault = false;
    unsigned threads = 1;
};

struct Report {
    Level level = Level::full;
    std::vector<CheckResult> checks;
    nlohmann::json observations = nlohmann::json::object();  ///< measured, not asserted
    double seconds = 0.0;

    bool all_passed() const;
    nlohmann::json to_json() const;
};

inline constexpr int kCriteria = 10;

/// Short title of acceptance criterion `id` (1..kCriteria).
std::string criterion_title(int id);

/// Runs one criterion's checks; `observations` receives measured-only data.
std::vector<CheckResult> run_criterion(int id, const Options& options, nlohmann::json& observations);

Report run(const Options& options);

}  // namespace compfade::validation
