#include "kbench/cli.hpp"

int main(int argc, char** argv) { return kbench::cli::run_cli(argc, argv); }
