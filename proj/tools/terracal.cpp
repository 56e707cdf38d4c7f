#include "terracal/cli.hpp"

int main(int argc, char** argv) { return terracal::cli::run(argc, argv); }
