#include <lpext/cli.hpp>

int main(int argc, char** argv) { return lpext::cli::run_cli(argc, argv); }
