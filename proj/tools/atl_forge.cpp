#include "atlforge/cli.hpp"

int main(int argc, char** argv) { return atlforge::cli::run(argc, argv); }
