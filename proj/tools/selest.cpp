#include "selest/cli.hpp"

int main(int argc, char** argv) { return selest::cli::run_cli(argc, argv); }
