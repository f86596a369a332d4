// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "posegan/cli.hpp"

int main(int argc, char** argv) { return posegan::run_cli(argc, argv, std::cout, std::cerr); }
