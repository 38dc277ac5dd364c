#include "cli.hpp"

int main(int argc, char** argv) {
  return sdae::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
