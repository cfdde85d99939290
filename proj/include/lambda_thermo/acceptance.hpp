#pragma once

// The ten acceptance criteria as executable checks, shared by the test
// binary and `verify --suite acceptance`.

#include <string>
#include <vector>

namespace lambda_thermo {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    /// Extra diagnostic line; never counted toward the verdict.
    bool informational = false;
    std::string detail;
    double seconds = 0.0;
};

inline constexpr int kCriterionCount = 10;

/// Runs criterion `id` (1..10). Throws DomainError for other ids.
/// Criterion 10 appends an informational line, so this may return two results.
std::vector<CriterionResult> run_criterion(int id);

/// All criteria in order.
std::vector<CriterionResult> run_acceptance();

/// "PASS  3  Characteristic polynomial identity  (0.02 s)  detail"
std::string format_line(const CriterionResult& r);

/// True when every non-informational result passed.
bool all_passed(const std::vector<CriterionResult>& results);

} // namespace lambda_thermo
