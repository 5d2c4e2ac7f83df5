#include "pdc/cli.hpp"

int main(int argc, char** argv) { return pdc::cli::run(argc, argv); }
