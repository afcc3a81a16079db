#include "flowforge/cli.hpp"

int main(int argc, char** argv) { return flowforge::cli_main(argc, argv); }
