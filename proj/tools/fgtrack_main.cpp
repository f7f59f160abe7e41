#include "fgtrack/cli.hpp"

int main(int argc, char** argv) { return fgtrack::cli::run_main(argc, argv); }
