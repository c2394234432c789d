#include "dnmr/cli.hpp"

int main(int argc, char** argv) { return dnmr::cli::dispatch(argc, argv); }
