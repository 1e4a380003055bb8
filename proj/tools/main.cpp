#include "ecofair/cli.hpp"

int main(int argc, char** argv) { return ecofair::cli::run_cli(argc, argv); }
