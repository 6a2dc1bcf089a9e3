#include <iostream>
#include <string>
#include <vector>

#include "disk/cli/app.hpp"
#include "disk/tensor.hpp"

int main(int argc, char** argv) {
  disk::tune_allocator();
  return disk::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
