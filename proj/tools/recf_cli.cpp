#include "recf/cli.hpp"

int main(int argc, char** argv) { return recf::run_cli(argc, argv); }
