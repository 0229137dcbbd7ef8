#include "sprel/cli.hpp"

int main(int argc, char** argv) { return sprel::cli::main(argc, argv); }
