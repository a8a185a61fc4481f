#include "gdf/cli.hpp"

int main(int argc, char** argv) { return gdf::cli::run_command(argc, argv); }
