#include <qhl/cli.hpp>

int main(int argc, char** argv) { return qhl::cli::run(argc, argv); }
