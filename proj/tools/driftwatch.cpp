#include "driftwatch/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return driftwatch::dispatch(argc, argv, std::cout, std::cerr); }
