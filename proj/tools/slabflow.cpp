#include "slabflow/commands.hpp"

int main(int argc, char** argv) { return slabflow::run_cli(argc, argv); }
