#include "fedra/cli.hpp"

int main(int argc, char** argv) { return fedra::cli::run(argc, argv); }
