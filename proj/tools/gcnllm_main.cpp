// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "gcnllm/cli.h"

int main(int argc, char **argv) {
  return gcnllm::run(argc, argv, std::cout, std::cerr);
}
