#include "ktvgl/cli.hpp"

int main(int argc, char** argv) {
  return ktvgl::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
