#include "lehmer/cli.hpp"

int main(int argc, char** argv) { return lehmer_mean::cli::run(argc, argv); }
