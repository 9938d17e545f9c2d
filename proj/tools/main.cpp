#include "cli.hpp"

int main(int argc, char** argv) { return vanet::cli::main(argc, argv); }
