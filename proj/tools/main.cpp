#include "rangevar/cli.hpp"

int main(int argc, char** argv) { return rangevar::cli::run(argc, argv); }
