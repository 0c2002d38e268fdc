#include "netdiscern/cli.hpp"

int main(int argc, char** argv) { return netdiscern::run_cli(argc, argv); }
