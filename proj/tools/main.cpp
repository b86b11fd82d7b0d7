#include "cli.hpp"

int main(int argc, char** argv) { return gbias::cli::run(argc, argv); }
