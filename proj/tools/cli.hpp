#pragma once
namespace rangerec { int cli_main(int argc, char** argv); }
