#include "plr/cli.hpp"

int main(int argc, char** argv) { return plr::dispatch(argc, argv); }
