#include "viewshift/cli.hpp"

int main(int argc, char** argv) { return viewshift::cli::run(argc, argv); }
