#include "sem/cli.hpp"

int main(int argc, char** argv) { return sem::cli_main(argc, argv); }
