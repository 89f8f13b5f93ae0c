#include "texbake/cli.hpp"

int main(int argc, char** argv) { return texbake::run_cli(argc, argv); }
