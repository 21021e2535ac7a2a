#include "besra/cli.hpp"

int main(int argc, char** argv) { return besra::run_cli(argc, argv); }
