#include <cstdlib>
#include <cstring>
#include <iostream>

#include "moduli/acceptance.hpp"

int main(int argc, char** argv) {
    int jobs = 1;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::strcmp(argv[i], "--jobs") == 0) jobs = std::atoi(argv[i + 1]);
    int failed = 0;
    for (auto& r : moduli::acceptance::run_all(jobs)) {
        std::cout << moduli::acceptance::format_line(r) << '\n';
        failed += !r.result.pass;
    }
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed") << '\n';
    return failed ? 1 : 0;
}
