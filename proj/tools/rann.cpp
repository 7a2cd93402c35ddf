#include <string>
#include <vector>

#include "rann/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rann::run_cli(args);
}
