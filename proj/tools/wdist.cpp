#include "wdist/cli/app.hpp"

int main(int argc, char** argv) { return wdist::cli::run(argc, argv); }
