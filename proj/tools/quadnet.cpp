#include <string>
#include <vector>

#include "quadnet/cli.hpp"

int main(int argc, char** argv) { return quadnet::run_cli(std::vector<std::string>(argv, argv + argc)); }
