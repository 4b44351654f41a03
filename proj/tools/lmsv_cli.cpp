#include "lmsv/cli.hpp"

int main(int argc, char** argv) {
    return lmsv::run_cli(argc, argv);
}
