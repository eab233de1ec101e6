#include "cli.hpp"

int main(int argc, char** argv) { return fbp::cli::run_cli(std::vector<std::string>(argv, argv + argc)); }
