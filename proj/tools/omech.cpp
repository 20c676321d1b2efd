#include "omech/cli.hpp"

int main(int argc, char** argv) { return omech::cli::run(argc, argv); }
