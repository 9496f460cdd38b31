#include "unruh/cli.hpp"

int main(int argc, char** argv) { return unruh::cli::main_entry(argc, argv); }
