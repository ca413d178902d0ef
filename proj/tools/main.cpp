#include "islandga/cli_main.hpp"

int main(int argc, char** argv) { return islandga::cli::run_main(argc, argv); }
