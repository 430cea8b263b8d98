// Acceptance run: one PASS/FAIL line per criterion; exit status 1 on any failure.
#include "singspec/acceptance.hpp"

#include <cstdio>

int main() {
    int failed = 0;
    for (int id = 1; id <= singspec::criterion_count; ++id) {
        const auto r = singspec::run_criterion(id);
        std::printf("%s\n", singspec::format_result(r).c_str());
        std::fflush(stdout);
        failed += !r.pass;
    }
    std::printf("%d of %d criteria passed\n", singspec::criterion_count - failed, singspec::criterion_count);
    return failed == 0 ? 0 : 1;
}
