#include "confound_ope/cli.hpp"

int main(int argc, char** argv) { return confound_ope::cli::run(argc, argv); }
