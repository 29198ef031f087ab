#include "conmf/bench.hpp"

int main(int argc, char** argv) { return conmf::cli_main(argc, argv); }
