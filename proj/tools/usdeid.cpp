#include "usdeid/cli.hpp"

int main(int argc, char** argv) { return usdeid::cli::main(argc, argv); }
