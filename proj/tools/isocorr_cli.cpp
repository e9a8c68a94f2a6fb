#include <iostream>
#include <string>
#include <vector>

#include "isocorr/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  const isocorr::CliResult result = isocorr::run_cli(std::move(args));
  if (!result.output.empty()) std::cout << result.output << '\n';
  if (!result.error.empty()) std::cerr << "error: " << result.error << '\n';
  return result.exit_code;
}
