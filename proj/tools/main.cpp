#include "paraforge/cli.hpp"

int main(int argc, char** argv) { return paraforge::run_cli(argc, argv); }
