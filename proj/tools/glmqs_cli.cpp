#include "glmqs/harness.hpp"

int main(int argc, char** argv) { return glmqs::cli_main(argc, argv); }
