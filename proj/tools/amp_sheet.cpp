#include <amp_sheet/cli.hpp>

int main(int argc, char** argv) { return amp_sheet::cli::run(argc, argv); }
