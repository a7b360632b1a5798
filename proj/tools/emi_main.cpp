#include <string>
#include <vector>

#include "emi/cli/app.hpp"

int main(int argc, char** argv) { return emi::cli::run_main(std::vector<std::string>(argv, argv + argc)); }
