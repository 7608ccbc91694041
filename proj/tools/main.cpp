#include "mrseries/cli.hpp"

int main(int argc, char** argv) { return mrseries::cli::main_entry(argc, argv); }
