#include "spongedim/suites.hpp"

int main() { return spongedim::suites::run_suite(spongedim::suites::acceptance_checks()) == 0 ? 0 : 1; }
