#include "cli.hpp"
int main(int argc, char** argv) { return rangerec::cli_main(argc, argv); }
