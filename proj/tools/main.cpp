#include "blockcm/cli.hpp"

int main(int argc, char** argv) { return blockcm::cli::main_entry(argc, argv); }
