#include "qslsense/cli.hpp"

int main(int argc, char **argv) { return qsl::cli::main_entry(argc, argv); }
