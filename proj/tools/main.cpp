#include "fcnv/cli.hpp"

int main(int argc, char** argv) { return fcnv::run_cli(argc, argv); }
