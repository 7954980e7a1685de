#include "mobo/cli.hpp"

int main(int argc, char** argv) { return mobo::cli_main(argc, argv); }
