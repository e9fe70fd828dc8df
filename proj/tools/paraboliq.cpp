#include "paraboliq/cli.hpp"

int main(int argc, char** argv) { return paraboliq::cli::main_entry(argc, argv); }
