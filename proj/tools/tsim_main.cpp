#include "tsim/cli.hpp"

int main(int argc, char** argv) { return tsim::run_cli(argc, argv); }
