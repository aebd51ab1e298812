#include "shbreg/cli.hpp"

int main(int argc, char** argv) { return shbreg::cli::main_entry(argc, argv); }
