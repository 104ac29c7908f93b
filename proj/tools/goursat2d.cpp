#include "goursat2d/cli.hpp"

int main(int argc, char** argv) { return goursat2d::cli::run(argc, argv); }
