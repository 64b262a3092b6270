#include "pmotion/cli.hpp"

int main(int argc, char** argv) { return pmotion::cli::run(argc, argv); }
