#include "robustreg/cli.hpp"

int main(int argc, char** argv) { return robustreg::cli_run(argc, argv); }
