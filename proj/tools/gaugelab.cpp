#include "gaugelab/cli.hpp"

int main(int argc, char** argv) { return gaugelab::run_cli(argc, argv); }
