#include "floodgate/cli.hpp"

int main(int argc, char** argv) { return floodgate::cli_main(argc, argv); }
