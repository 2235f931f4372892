#include "rdiag/app.hpp"

int main(int argc, char** argv) { return rdiag::app::main(argc, argv); }
