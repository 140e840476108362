#include "elimtas/cli.hpp"

int main(int argc, char** argv) { return elimtas::cli::dispatch(argc, argv); }
