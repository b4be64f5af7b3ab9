#pragma once

#include <string>
#include <vector>

namespace xpi {

struct CriterionResult {
    int id;
    std::string name;
    bool passed;
    std::string detail;
    double seconds;
};

struct VerifyOptions {
    unsigned long seed = 1234;  // master seed for the randomized sweeps
    std::string cli_path;       // xpi binary used by the reproducibility check
};

/// Runs the full numerical verification suite, one result per criterion.
std::vector<CriterionResult> run_acceptance(const VerifyOptions& options);

/// Prints one PASS/FAIL line per criterion; returns the number of failures.
int report_acceptance(const std::vector<CriterionResult>& results);

}  // namespace xpi
