#include "hwc/cli.hpp"

int main(int argc, char** argv) {
    return hwc::cli::run(argc, argv);
}
