#include <iostream>
#include <string>
#include <vector>

#include "mfgan/cli/experiment.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return mfgan::cli::run_experiment(args, std::cout, std::cerr);
}
