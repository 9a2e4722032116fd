#include "berglab/cli.hpp"

int main(int argc, char** argv) { return berglab::cli_main(argc, argv); }
