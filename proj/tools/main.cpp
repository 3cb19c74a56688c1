#include "cli.hpp"

int main(int argc, char** argv) { return shapereg::cli::run(argc, argv); }
