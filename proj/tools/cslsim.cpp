#include "csl/cli/app.hpp"

int main(int argc, char** argv) { return csl::cli::run(argc, argv); }
