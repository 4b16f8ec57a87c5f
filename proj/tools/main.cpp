#include "conereg/cli.hpp"

int main(int argc, char** argv) { return conereg::run_cli(argc, argv); }
