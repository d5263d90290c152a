#include "kbq/cli.hpp"

int main(int argc, char** argv) { return kbq::cli::run(argc, argv); }
