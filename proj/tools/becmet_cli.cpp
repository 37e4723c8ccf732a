#include "becmet/cli.hpp"

int main(int argc, char** argv) { return becmet::cli::run(argc, argv); }
