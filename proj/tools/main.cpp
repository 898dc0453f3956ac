#include "bnorder/cli.hpp"

int main(int argc, char** argv) { return bnorder::cli_main(argc, argv); }
