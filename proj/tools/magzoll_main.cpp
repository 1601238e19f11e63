#include "magzoll/cli.hpp"

int main(int argc, char** argv) { return magzoll::run_cli(argc, argv); }
