#include "sgflow/cli.hpp"

int main(int argc, char** argv) { return sgflow::cli::dispatch(argc, argv); }
