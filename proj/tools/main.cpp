#include "cli.hpp"
int main(int argc, char** argv) { return nleig::cli::main_entry(argc, argv); }
