#include "conebvp/cli.hpp"

int main(int argc, char** argv) { return conebvp::cli::run(argc, argv); }
