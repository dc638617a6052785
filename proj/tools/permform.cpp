#include "permform/cli.hpp"

int main(int argc, char** argv) { return permform::cli::run_cli(argc, argv); }
