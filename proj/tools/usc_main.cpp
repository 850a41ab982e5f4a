#include "usc/cli.hpp"

int main(int argc, char** argv) { return usc::CliMain(argc, argv); }
