#include "coaccess/cli.hpp"

int main(int argc, char** argv) { return coaccess::cli::run(argc, argv); }
