#pragma once

#include <string>
#include <vector>

namespace singspec {

struct criterion_result {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail; // measured quantities, or the exception text
    double seconds = 0.0;
};

constexpr int criterion_count = 10;

// Runs one acceptance criterion (1..criterion_count). Exceptions raised by
// the computation are reported as a failure, never rethrown.
criterion_result run_criterion(int id);

std::vector<criterion_result> run_all_criteria();

// "PASS 3 symmetry ... (0.12 s) detail"
std::string format_result(const criterion_result& r);

} // namespace singspec
