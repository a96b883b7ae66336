#include <csignal>
#include <iostream>
#include <string>
#include <vector>

#include "focal/cli.hpp"

namespace {

void on_signal(int) { focal::cli::request_stop(); }

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::vector<std::string> args(argv, argv + argc);
  return focal::cli::run(args, std::cout, std::cerr);
}
