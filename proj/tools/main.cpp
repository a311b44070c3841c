#include "cavitychip/cli.hpp"

int main(int argc, char** argv) { return cavitychip::cli::run(argc, argv); }
