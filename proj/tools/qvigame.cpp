#include "qvi/run_config.hpp"

int main(int argc, char** argv) { return qvi::run(argc, argv); }
