#include <csignal>
#include <iostream>

#include "cli.hpp"

namespace {

extern "C" void on_signal(int) { ghs::request_cli_shutdown(); }

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  return ghs::run_cli(argc, argv, std::cout, std::cerr);
}
