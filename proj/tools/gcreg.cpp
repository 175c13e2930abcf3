#include "gcreg/cli.hpp"

int main(int argc, char** argv) { return gcreg::run_cli(argc, argv); }
