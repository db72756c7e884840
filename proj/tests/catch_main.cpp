// Catch2 v3 amalgamated implementation; provides main() for the unit suite.
#include <catch2/catch_amalgamated.cpp>
