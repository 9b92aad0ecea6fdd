#include "jetrl/io/commands.hpp"

int main(int argc, char** argv) { return jetrl::run_cli(argc, argv); }
