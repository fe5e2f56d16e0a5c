#include "gdapl/cli.hpp"

int main(int argc, char** argv) { return gdapl::cli_dispatch(argc, argv); }
