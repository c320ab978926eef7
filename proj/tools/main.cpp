#include "lcl/harness.hpp"

int main(int argc, char** argv) { return lcl::run_cli(argc, argv); }
