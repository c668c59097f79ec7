#include "cli.hpp"
namespace rangerec { int cli_main(int, char**) { return 0; } }
