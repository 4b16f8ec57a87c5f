#pragma once

// Command-line driver: check-slater, reduce, singularity, degeneracy,
// ipm-probe, perturb. Exit code 0 = completed, 2 = some verdict stayed
// undetermined, 1 = input error.

#include <string>
#include <vector>

namespace conereg {

int run_cli(int argc, char** argv);
int run_cli(const std::vector<std::string>& args);  // without the program name

}  // namespace conereg
