#include "cli.hpp"

int main(int argc, char** argv) { return dyshift::cli::run(argc, argv); }
