#include "openworld/cli.hpp"

int main(int argc, char** argv) { return openworld::cli_main(argc, argv); }
