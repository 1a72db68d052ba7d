#include "epi/cli.hpp"

int main(int argc, char** argv) { return epi::cli::run(argc, argv); }
