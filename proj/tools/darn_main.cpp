#include "darn/cli.hpp"

int main(int argc, char** argv) { return darn::run_cli(argc, argv); }
