#include "fvss/cli.hpp"

#include <iostream>

namespace fvss::cli {

int run_cli(int, char**) {
  std::cerr << "fvss: not yet wired\n";
  return 1;
}

}  // namespace fvss::cli
