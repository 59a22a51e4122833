#include "lexiscope/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return lexiscope::cli::dispatch(argc, argv, std::cout, std::cerr); }
