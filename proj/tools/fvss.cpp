#include "fvss/cli.hpp"

int main(int argc, char** argv) { return fvss::cli::run_cli(argc, argv); }
