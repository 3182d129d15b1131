#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    // Data goes to stdout or --output; summaries and diagnostics to stderr.
    return etod::cli::main_entry(argc, argv, std::cerr, std::cerr);
}
